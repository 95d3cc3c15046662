#include "rpnlgp/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>

#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

namespace rpnlgp {

namespace {

// Worst relative error of the model on a batch, +inf on any invalid mismatch.
double max_relative_error(const Genome& genome, const DatasetBatch& batch, KernelScratch& scratch,
                          std::vector<EvalOutcome>& outputs) {
  outputs.resize(static_cast<std::size_t>(batch.n_cases()));
  eval_cases(genome, batch, scratch, outputs);
  const auto targets = batch.targets();
  double worst = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i].is_valid() != targets[i].is_valid()) return std::numeric_limits<double>::infinity();
    if (!targets[i].is_valid()) continue;
    const double y = targets[i].value();
    worst = std::max(worst, std::abs(outputs[i].value() - y) / std::max(std::abs(y), kRelativeErrorGuard));
  }
  return worst;
}

}  // namespace

void ExperimentConfig::check() const {
  if (!(time_limit_s >= 0.0)) throw UsageError("time limit must be >= 0 seconds");
  if (repeats < 1) throw UsageError("repeats must be >= 1");
  if (batch_size < 1 || batch_size > kTrainCases) throw UsageError("batch size must be in [1, 512]");
  if (max_generations < 0) throw UsageError("max generations must be >= 0");
  if (parallel_runs < 1) throw UsageError("parallel runs must be >= 1");
  if (!(arena_headroom >= 1.0)) throw UsageError("arena headroom must be >= 1");
  if (schedule.steps().empty()) throw UsageError("population schedule is empty");
  genome.check();
  control.check();
  FitnessConfig f = fitness;
  f.batch_size = batch_size;
  f.check();
  find_problem(problem);
}

RunRecord run_one(const ExperimentConfig& config, std::uint64_t seed) {
  using Clock = std::chrono::steady_clock;
  const Clock::time_point start = Clock::now();
  const auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  config.check();
  const ProblemSpec& spec = find_problem(config.problem);

  RunRecord record;
  record.problem = spec.id;
  record.schedule = config.schedule.to_string();
  record.seed = seed;
  record.time_limit_s = config.time_limit_s;
  record.batch_size = config.batch_size;
  record.reuse_survivor_scores = config.reuse_survivor_scores;

  const Dataset data = generate_dataset(spec, seed);
  const DatasetBatch train =
      config.batch_size == data.train.n_cases() ? data.train : data.train.head(config.batch_size);
  FitnessConfig fitness = config.fitness;
  fitness.batch_size = config.batch_size;

  Rng rng(derive_seed(seed, 0xe70));
  const int arity = spec.arity();
  const auto capacity = static_cast<std::size_t>(
      std::ceil(config.arena_headroom * static_cast<double>(config.schedule.max_target())));

  PopulationEvaluator evaluator(config.workers);
  evaluator.set_reuse_scores(config.reuse_survivor_scores);
  std::optional<Genome> best;
  double best_score = -std::numeric_limits<double>::infinity();
  double best_error = std::numeric_limits<double>::infinity();
  KernelScratch scratch;
  std::vector<EvalOutcome> outputs;

  try {
    Arena arena(capacity);
    PopulationController controller(config.control);
    const MutateFn mutate_fn = [&](const Genome& g, Rng& r) { return mutate(g, r, config.genome, arity); };

    int steering_target = target_for_generation(config.schedule, 0);
    for (int i = 0; i < steering_target; ++i) {
      Individual& ind = arena[arena.acquire()];
      ind.genome = random_genome(rng, config.genome, arity);
      ind.birth_generation = 0;
    }

    for (int g = 0;; ++g) {
      if (config.max_generations > 0 && g >= config.max_generations) break;
      // Checked only here: a generation that has started always finishes.
      if (elapsed() >= config.time_limit_s) break;

      const std::span<const double> scores =
          config.max_chunk > 0 ? evaluator.evaluate_in_chunks(arena, train, fitness, config.max_chunk)
                               : evaluator.evaluate_population(arena, train, fitness);
      const std::span<const SlotId> alive = arena.alive();
      double generation_best = -std::numeric_limits<double>::infinity();
      for (double v : scores) generation_best = std::max(generation_best, v);
      // The correlation score cannot tell a model from an affine copy of it,
      // so ties at the best score go to the lowest raw training error.
      // After a strict improvement every tied individual is a candidate;
      // otherwise only those evaluated for the first time.
      const bool improved = generation_best > best_score;
      if (improved) {
        best_score = generation_best;
        best.reset();
        best_error = std::numeric_limits<double>::infinity();
      }
      for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] != best_score) continue;
        const Individual& ind = arena[alive[i]];
        if (!improved && ind.birth_generation != g) continue;
        const double error = max_relative_error(ind.genome, train, scratch, outputs);
        if (!best || error < best_error) {
          best = ind.genome;
          best_error = error;
        }
      }

      record.generations.push_back({g, arena.alive_count(), steering_target, best_score, elapsed()});

      if (arena.alive_count() < 2) {
        record.diagnostic = "population extinct at generation " + std::to_string(g);
        break;
      }
      const MicrocosmTable table = sample_microcosm(arena, rng, config.control.microcosm_size);
      steering_target = target_for_generation(config.schedule, g);
      controller.step_population(arena, table, steering_target, rng, mutate_fn, g);
    }
  } catch (const CapacityError& e) {
    record.diagnostic = e.what();
  }

  record.totals = evaluator.stats();
  if (best) {
    record.best_genome = to_text(*best);
    record.best_score = best_score;
    record.verdict = validate_model(*best, data.test);
  } else {
    record.verdict.solved = false;
    record.verdict.max_relative_error = std::numeric_limits<double>::infinity();
  }
  record.wall_time_s = elapsed();
  return record;
}

WilsonInterval wilson_interval(int successes, int n, double z) {
  if (n < 1) throw UsageError("Wilson interval needs n >= 1");
  if (successes < 0 || successes > n) throw UsageError("Wilson interval needs 0 <= successes <= n");
  if (!(z > 0)) throw UsageError("Wilson interval needs z > 0");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  return {std::max(0.0, center - half), std::min(1.0, center + half), center};
}

Summary summarize(std::span<const RunRecord> records) {
  if (records.empty()) throw UsageError("cannot summarize zero run records");
  Summary s;
  s.problem = records.front().problem;
  s.schedule = records.front().schedule;
  for (const RunRecord& r : records) {
    if (r.problem != s.problem || r.schedule != s.schedule) {
      throw UsageError("summarize: records mix configurations");
    }
    s.solved += r.verdict.solved ? 1 : 0;
    s.generations.push_back(r.generations_completed());
    s.model_evaluations.push_back(r.totals.total_model_evaluations);
    s.case_evaluations.push_back(r.totals.total_case_evaluations);
  }
  s.repeats = static_cast<int>(records.size());
  s.interval = wilson_interval(s.solved, s.repeats);
  return s;
}

std::vector<Summary> summarize_all(std::span<const RunRecord> records) {
  std::vector<std::pair<std::string, std::string>> keys;
  for (const RunRecord& r : records) {
    const std::pair<std::string, std::string> key{r.problem, r.schedule};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::vector<Summary> out;
  for (const auto& key : keys) {
    std::vector<RunRecord> group;
    for (const RunRecord& r : records) {
      if (r.problem == key.first && r.schedule == key.second) group.push_back(r);
    }
    out.push_back(summarize(group));
  }
  return out;
}

std::vector<RunRecord> run_many(const ExperimentConfig& config, const std::function<void(const RunRecord&)>& on_record) {
  config.check();
  std::vector<RunRecord> records(static_cast<std::size_t>(config.repeats));
  std::mutex report_mutex;
  auto one = [&](std::size_t i) {
    RunRecord r;
    const std::uint64_t seed = config.base_seed + i;
    try {
      r = run_one(config, seed);
    } catch (const std::exception& e) {
      // A failed run counts as unsolved.
      r.problem = find_problem(config.problem).id;
      r.schedule = config.schedule.to_string();
      r.seed = seed;
      r.time_limit_s = config.time_limit_s;
      r.batch_size = config.batch_size;
      r.verdict.max_relative_error = std::numeric_limits<double>::infinity();
      r.diagnostic = std::string("run failed: ") + e.what();
    }
    if (on_record) {
      std::lock_guard lock(report_mutex);
      on_record(r);
    }
    records[i] = std::move(r);
  };

  if (config.parallel_runs == 1) {
    for (std::size_t i = 0; i < records.size(); ++i) one(i);
  } else {
    tbb::task_arena runs(config.parallel_runs);
    runs.execute([&] { tbb::parallel_for(std::size_t{0}, records.size(), one); });
  }
  return records;
}

}  // namespace rpnlgp
