#include "rpnlgp/selection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace rpnlgp {

namespace {

// Branch-free lower bound; the table is tiny and stays in L1.
std::size_t count_below(const std::vector<double>& sorted, double x) {
  const double* data = sorted.data();
  const double* base = data;
  std::size_t n = sorted.size();
  while (n > 1) {
    const std::size_t half = n / 2;
    base = (base[half] < x) ? base + half : base;
    n -= half;
  }
  return static_cast<std::size_t>(base - data) + static_cast<std::size_t>(*base < x);
}

/// min(k, n) distinct positions in [0, n), uniformly (Floyd's algorithm).
std::vector<std::size_t> sample_positions(std::size_t n, Rng& rng, std::size_t k) {
  std::vector<std::size_t> picked;
  if (n <= k) {
    picked.resize(n);
    std::iota(picked.begin(), picked.end(), std::size_t{0});
    return picked;
  }
  picked.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    const std::size_t t = uniform_index(rng, j + 1);
    const bool seen = std::find(picked.begin(), picked.end(), t) != picked.end();
    picked.push_back(seen ? j : t);
  }
  return picked;
}

int parse_int(std::string_view text, std::string_view what) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value < 0 || value > 2'000'000'000) {
    throw UsageError("bad " + std::string(what) + " '" + std::string(text) + "' in population schedule");
  }
  return static_cast<int>(value);
}

}  // namespace

PopulationSchedule::PopulationSchedule(std::vector<ScheduleStep> steps) : steps_(std::move(steps)) {
  if (steps_.empty() || steps_.front().from_generation != 0) {
    throw UsageError("population schedule must start at generation 0");
  }
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    if (steps_[i].target_size < 2) throw UsageError("population targets must be >= 2");
    if (i > 0 && steps_[i].from_generation <= steps_[i - 1].from_generation) {
      throw UsageError("population schedule generations must be strictly increasing");
    }
  }
}

PopulationSchedule PopulationSchedule::constant(int target) { return PopulationSchedule({{0, target}}); }

PopulationSchedule PopulationSchedule::parse(std::string_view text) {
  std::vector<ScheduleStep> steps;
  if (text.find(':') == std::string_view::npos && text.find(',') == std::string_view::npos) {
    return constant(parse_int(text, "population size"));
  }
  while (!text.empty()) {
    const std::size_t comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    const std::size_t colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw UsageError("population schedule entries must look like gen:size, got '" + std::string(item) + "'");
    }
    steps.push_back({parse_int(item.substr(0, colon), "generation"), parse_int(item.substr(colon + 1), "size")});
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return PopulationSchedule(std::move(steps));
}

int PopulationSchedule::max_target() const {
  int best = 0;
  for (const ScheduleStep& s : steps_) best = std::max(best, s.target_size);
  return best;
}

std::string PopulationSchedule::to_string() const {
  std::string out;
  for (const ScheduleStep& s : steps_) {
    if (!out.empty()) out.push_back(',');
    out += std::to_string(s.from_generation) + ":" + std::to_string(s.target_size);
  }
  return out;
}

int target_for_generation(const PopulationSchedule& schedule, int generation) {
  if (generation < 0) throw UsageError("generation must be >= 0");
  const auto steps = schedule.steps();
  if (steps.empty()) throw UsageError("empty population schedule");
  int target = steps.front().target_size;
  for (const ScheduleStep& s : steps) {
    if (s.from_generation > generation) break;
    target = s.target_size;
  }
  return target;
}

void ControlParams::check() const {
  if (microcosm_size < 2) throw UsageError("microcosm size k must be >= 2");
  if (!(weight_slope > 0)) throw UsageError("weight slope must be positive");
  if (max_offspring_per_individual < 1 || max_offspring_per_individual > 255) {
    throw UsageError("max offspring per individual must be in [1, 255]");
  }
}

MicrocosmTable sample_microcosm(std::span<const double> scores, Rng& rng, int k) {
  if (k < 1) throw UsageError("microcosm size must be >= 1");
  if (scores.empty()) throw UsageError("cannot sample a microcosm from an empty population");
  MicrocosmTable table;
  for (std::size_t i : sample_positions(scores.size(), rng, static_cast<std::size_t>(k))) {
    table.sorted_scores.push_back(scores[i]);
  }
  std::sort(table.sorted_scores.begin(), table.sorted_scores.end());
  return table;
}

MicrocosmTable sample_microcosm(const Arena& arena, Rng& rng, int k) {
  if (k < 1) throw UsageError("microcosm size must be >= 1");
  const auto alive = arena.alive();
  if (alive.empty()) throw UsageError("cannot sample a microcosm from an empty population");
  MicrocosmTable table;
  for (std::size_t i : sample_positions(alive.size(), rng, static_cast<std::size_t>(k))) {
    table.sorted_scores.push_back(arena[alive[i]].score);
  }
  std::sort(table.sorted_scores.begin(), table.sorted_scores.end());
  return table;
}

double percentile_of(double score, const MicrocosmTable& table) {
  if (table.empty()) throw UsageError("percentile lookup on an empty microcosm table");
  return static_cast<double>(count_below(table.sorted_scores, score)) / static_cast<double>(table.size());
}

double selection_percentile(double score, const MicrocosmTable& table) {
  return table.flat() ? 0.5 : percentile_of(score, table);
}

double control_gain(const MicrocosmTable& table, std::size_t alive_count, int target, const ControlParams& params) {
  if (alive_count == 0) throw UsageError("control gain needs a non-empty population");
  if (target < 2) throw UsageError("population target must be >= 2");
  // The table's own mean weight estimates the population mean of w(p); it is
  // below 1 when many scores tie at the bottom. Each entry is ranked against
  // the other k - 1 entries so the estimate is unbiased for distinct scores.
  double mean_weight = params.weight_slope * 0.5;
  if (!table.flat()) {
    const auto k = static_cast<double>(table.size());
    double below = 0.0;
    for (double s : table.sorted_scores) below += static_cast<double>(count_below(table.sorted_scores, s));
    mean_weight = params.weight_slope * below / (k * (k - 1.0));
  }
  const double lambda = static_cast<double>(target) / static_cast<double>(alive_count);
  return mean_weight > 0.0 ? lambda / mean_weight : lambda;
}

int offspring_count(double percentile, double gain, Rng& rng, const ControlParams& params) {
  const double expected = gain * params.weight_slope * percentile;
  const double whole = std::floor(expected);
  int copies = static_cast<int>(std::min(whole, 255.0)) + static_cast<int>(bernoulli(rng, expected - whole));
  return std::min(copies, params.max_offspring_per_individual);
}

void plan_offspring(std::span<const double> scores, const MicrocosmTable& table, double gain, Rng& rng,
                    const ControlParams& params, std::span<std::uint8_t> copies) {
  if (copies.size() != scores.size()) throw UsageError("copies buffer must match the score count");
  if (table.empty()) throw UsageError("plan_offspring needs a microcosm table");
  // Only k + 1 percentiles are possible, so the copy rule is tabulated once.
  const std::size_t k = table.size();
  const double inv_size = 1.0 / static_cast<double>(k);
  const double base = gain * params.weight_slope;
  std::vector<int> whole(k + 1);
  std::vector<double> frac(k + 1);
  for (std::size_t c = 0; c <= k; ++c) {
    const double expected = base * (static_cast<double>(c) * inv_size);
    const double w = std::floor(expected);
    whole[c] = static_cast<int>(std::min(w, 255.0));
    frac[c] = expected - w;
  }
  const int cap = params.max_offspring_per_individual;
  if (table.flat()) {
    const double expected = base * 0.5;
    const double w = std::floor(expected);
    std::fill(whole.begin(), whole.end(), static_cast<int>(std::min(w, 255.0)));
    std::fill(frac.begin(), frac.end(), expected - w);
  }
  SplitMix64 draws(rng());
  auto emit = [&](std::size_t i, std::size_t c) {
    const int n = whole[c] + static_cast<int>(bernoulli(draws, frac[c]));
    copies[i] = static_cast<std::uint8_t>(std::min(n, cap));
  };
  const std::size_t count = scores.size();
  if (table.flat()) {
    for (std::size_t i = 0; i < count; ++i) emit(i, 0);
    return;
  }
  // Lockstep branch-free searches: the step sequence depends only on k, so
  // eight independent load chains overlap.
  constexpr std::size_t kLanes = 8;
  const double* sorted = table.sorted_scores.data();
  std::size_t i = 0;
  for (; i + kLanes <= count; i += kLanes) {
    std::size_t pos[kLanes] = {};
    for (std::size_t len = k; len > 1; len -= len / 2) {
      const std::size_t half = len / 2;
      for (std::size_t l = 0; l < kLanes; ++l) pos[l] = sorted[pos[l] + half] < scores[i + l] ? pos[l] + half : pos[l];
    }
    for (std::size_t l = 0; l < kLanes; ++l) pos[l] += static_cast<std::size_t>(sorted[pos[l]] < scores[i + l]);
    for (std::size_t l = 0; l < kLanes; ++l) emit(i + l, pos[l]);
  }
  for (; i < count; ++i) emit(i, count_below(table.sorted_scores, scores[i]));
}

void rank_offspring_baseline(std::span<const double> scores, double gain, Rng& rng, const ControlParams& params,
                             std::span<std::uint8_t> copies) {
  if (copies.size() != scores.size()) throw UsageError("copies buffer must match the score count");
  const std::size_t n = scores.size();
  std::vector<std::pair<double, std::size_t>> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = {scores[i], i};
  std::sort(order.begin(), order.end());
  const double inv_n = 1.0 / static_cast<double>(n);
  const double base = gain * params.weight_slope;
  SplitMix64 draws(rng());
  std::size_t tie_start = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (r > 0 && order[r].first != order[r - 1].first) tie_start = r;
    const double expected = base * (static_cast<double>(tie_start) * inv_n);
    const double whole = std::floor(expected);
    const int c = static_cast<int>(std::min(whole, 255.0)) + static_cast<int>(bernoulli(draws, expected - whole));
    copies[order[r].second] = static_cast<std::uint8_t>(std::min(c, params.max_offspring_per_individual));
  }
}

PopulationController::PopulationController(ControlParams params) : params_(params) { params_.check(); }

GenerationDelta PopulationController::step_population(Arena& arena, const MicrocosmTable& table, int target,
                                                      Rng& rng, const MutateFn& mutate_fn, int generation) {
  if (target < 2) throw UsageError("population target must be >= 2");
  if (table.empty()) throw UsageError("step_population needs a microcosm table");

  GenerationDelta delta;
  delta.alive_before = arena.alive_count();
  if (delta.alive_before == 0) return delta;

  const auto alive = arena.alive();
  snapshot_.assign(alive.begin(), alive.end());
  scores_.resize(snapshot_.size());
  for (std::size_t i = 0; i < snapshot_.size(); ++i) scores_[i] = arena[snapshot_[i]].score;

  copies_.resize(snapshot_.size());
  const double gain = control_gain(table, delta.alive_before, target, params_);
  plan_offspring(scores_, table, gain, rng, params_, copies_);

  // Deaths first so births reuse their slots.
  for (std::size_t i = 0; i < snapshot_.size(); ++i) {
    if (copies_[i] == 0) {
      arena.release(snapshot_[i]);
      ++delta.deaths;
    }
  }
  for (std::size_t i = 0; i < snapshot_.size(); ++i) {
    if (copies_[i] == 0) continue;
    ++delta.survivors;
    for (int c = 1; c < copies_[i]; ++c) {
      Genome child = mutate_fn(arena[snapshot_[i]].genome, rng);
      const SlotId slot = arena.acquire();
      Individual& ind = arena[slot];
      ind.genome = std::move(child);
      ind.birth_generation = generation + 1;
      ++delta.births;
    }
  }
  delta.alive_after = arena.alive_count();
  return delta;
}

GenerationDelta step_population(Arena& arena, const MicrocosmTable& table, int target, Rng& rng,
                                const ControlParams& params, const MutateFn& mutate_fn, int generation) {
  PopulationController controller(params);
  return controller.step_population(arena, table, target, rng, mutate_fn, generation);
}

}  // namespace rpnlgp
