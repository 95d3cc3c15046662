// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "rpnlgp/runner.hpp"
#include "truth_genomes.hpp"

using namespace rpnlgp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  std::function<Outcome()> check;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void info(const std::string& line) {
  fmt::print("      info: {}\n", line);
  std::fflush(stdout);
}

Genome copy_parent(const Genome& g, Rng&) { return g; }

// --- 1 -----------------------------------------------------------------------
Outcome fitness_formula() {
  const double s = score({0.8, false}, {497, 10, 5, 512}, FitnessConfig{1000, 512});
  const double formula_error = std::abs(s - 198571.2);

  Rng rng(101);
  double worst = 0;
  for (int t = 0; t < 10000; ++t) {
    const auto n = 2 + uniform_index(rng, 1023);
    const double slope = uniform_real(rng, -3, 3);
    const double noise = std::exp(uniform_real(rng, -6, 3));
    std::vector<double> x(n), y(n);
    std::vector<EvalOutcome> xo(n), yo(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = uniform_real(rng, -10, 10);
      y[i] = slope * x[i] + noise * uniform_real(rng, -1, 1) + 7.0;
      xo[i] = EvalOutcome::finite(x[i]);
      yo[i] = EvalOutcome::finite(y[i]);
    }
    worst = std::max(worst, oracle::rel_diff(correlation(xo, yo).r, oracle::pearson(x, y)));
  }
  return {formula_error <= 1e-9 && worst <= 1e-10,
          fmt::format("score = {:.10f} (|err| {:.1e}); worst Pearson relative difference over 1e4 vectors {:.2e}",
                      s, formula_error, worst)};
}

// --- 2 -----------------------------------------------------------------------
Outcome genome_viability() {
  Rng rng(202);
  GenomeConfig cfg;
  long total = 0, viable = 0;
  for (int chain = 0; chain < 1000; ++chain) {
    const int arity = 1 + chain % 6;
    Genome g = random_genome(rng, cfg, arity);
    for (int step = 0; step < 1000; ++step) {
      g = mutate(g, rng, cfg, arity);
      ++total;
      viable += validate(g, arity) && within_bounds(g, cfg);
    }
  }
  // Repair on arbitrary sequences, the other half of the guarantee.
  long repaired = 0, repaired_ok = 0;
  for (int t = 0; t < 100000; ++t) {
    Genome g;
    for (auto n = uniform_index(rng, 80); n > 0; --n) {
      const auto kind = uniform_index(rng, 3);
      if (kind == 0) g.code.push_back(Instruction::var(static_cast<std::uint16_t>(uniform_index(rng, 8))));
      else if (kind == 1) g.code.push_back(Instruction::apply(static_cast<OpCode>(uniform_index(rng, kOpCount))));
      else g.code.push_back(Instruction::constant(static_cast<std::uint16_t>(uniform_index(rng, 4))));
    }
    g.constants = {1.0, 2.0};
    const Genome r = repair(g, rng, cfg, 3);
    ++repaired;
    repaired_ok += validate(r, 3) && within_bounds(r, cfg);
  }
  return {viable == total && repaired_ok == repaired,
          fmt::format("{}/{} mutations viable, {}/{} repairs viable", viable, total, repaired_ok, repaired)};
}

// --- 3 -----------------------------------------------------------------------
Outcome vm_oracle() {
  Rng rng(303);
  GenomeConfig cfg;
  long valid = 0, invalid = 0, mismatched = 0;
  double worst = 0;
  for (int t = 0; t < 1000; ++t) {
    const Genome g = random_genome(rng, cfg, 3);
    const auto tree = oracle::build_tree(to_text(g));
    if (!tree) return {false, "oracle could not parse " + to_text(g)};
    for (int c = 0; c < 100; ++c) {
      const std::vector<double> x{uniform_real(rng, -5, 5), uniform_real(rng, -5, 5), uniform_real(rng, -5, 5)};
      double expect = 0;
      const bool ok = oracle::eval_tree(*tree, x, expect);
      const EvalOutcome got = eval(g, x);
      if (ok != got.is_valid()) {
        ++mismatched;
      } else if (ok) {
        ++valid;
        worst = std::max(worst, oracle::rel_diff(got.value(), expect));
      } else {
        ++invalid;
      }
    }
  }
  return {mismatched == 0 && worst <= 1e-12,
          fmt::format("{} valid / {} invalid cases, {} validity mismatches, worst relative difference {:.2e}", valid,
                      invalid, mismatched, worst)};
}

// --- 4 -----------------------------------------------------------------------
Outcome population_stability() {
  const int target = 10000, gens = 500;
  Rng rng(404);
  Arena arena(2 * target);
  const Genome seed = parse_text("x0");
  for (int i = 0; i < target; ++i) arena[arena.acquire()].genome = seed;
  PopulationController ctl;
  int within = 0;
  double sum = 0, lo = 1e9, hi = 0;
  for (int g = 0; g < gens; ++g) {
    for (SlotId s : arena.alive()) arena[s].score = uniform01(rng);
    const MicrocosmTable table = sample_microcosm(arena, rng, 100);
    ctl.step_population(arena, table, target, rng, copy_parent, g);
    const double n = static_cast<double>(arena.alive_count());
    within += std::abs(n / target - 1.0) <= 0.2;
    sum += n;
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }
  const double mean_dev = std::abs(sum / gens / target - 1.0);
  return {within >= gens * 9 / 10 && mean_dev < 0.03,
          fmt::format("{}/{} generations within +-20%, mean deviation {:.3f}%, range [{}, {}]", within, gens,
                      100 * mean_dev, lo, hi)};
}

// --- 5 -----------------------------------------------------------------------
double survival_spearman(int alive, int target, int trials, std::uint64_t seed) {
  Rng rng(seed);
  ControlParams params;
  std::vector<double> scores(static_cast<std::size_t>(alive));
  for (int i = 0; i < alive; ++i) scores[static_cast<std::size_t>(i)] = i;  // score = true rank
  std::shuffle(scores.begin(), scores.end(), rng);
  std::vector<double> survived(scores.size(), 0.0);
  std::vector<std::uint8_t> copies(scores.size());
  for (int t = 0; t < trials; ++t) {
    const MicrocosmTable table = sample_microcosm(scores, rng, params.microcosm_size);
    const double gain = control_gain(table, scores.size(), target, params);
    plan_offspring(scores, table, gain, rng, params, copies);
    for (std::size_t i = 0; i < scores.size(); ++i) survived[i] += copies[i] > 0;
  }
  return oracle::spearman(scores, survived);
}

Outcome ranking_mimicry() {
  const double halving = survival_spearman(10000, 5000, 200, 505);
  const double steady = survival_spearman(10000, 10000, 200, 506);
  return {halving >= 0.95 && steady >= 0.95,
          fmt::format("Spearman(rank, survival frequency) over 200 trials on 1e4 individuals: {:.4f} at target = "
                      "alive/2, {:.4f} at target = alive",
                      halving, steady)};
}

// --- 6 -----------------------------------------------------------------------
Outcome selection_speed() {
  const std::size_t n = 1000000;
  Rng rng(606);
  ControlParams params;
  std::vector<double> scores(n);
  for (double& s : scores) s = uniform01(rng);
  std::vector<std::uint8_t> copies(n);
  const int target = static_cast<int>(n);

  double fast = 1e9, slow = 1e9;
  long checksum = 0;
  for (int rep = 0; rep < 5; ++rep) {
    auto t0 = std::chrono::steady_clock::now();
    const MicrocosmTable table = sample_microcosm(scores, rng, params.microcosm_size);
    plan_offspring(scores, table, control_gain(table, n, target, params), rng, params, copies);
    fast = std::min(fast, seconds_since(t0));
    checksum += copies[rep];

    t0 = std::chrono::steady_clock::now();
    rank_offspring_baseline(scores, 1.0, rng, params, copies);
    slow = std::min(slow, seconds_since(t0));
    checksum += copies[rep];
  }
  const double ratio = slow / fast;
  return {ratio >= 10.0, fmt::format("microcosm pass {:.2f} ms, full-sort baseline {:.2f} ms, speedup {:.1f}x (chk {})",
                                     1e3 * fast, 1e3 * slow, ratio, checksum % 10)};
}

// --- 7 and 8 -------------------------------------------------------------------
std::vector<RunRecord> scaling_runs;

const std::vector<RunRecord>& scaling_records() {
  if (!scaling_runs.empty()) return scaling_runs;
  for (int target : {100, 1000, 10000, 100000}) {
    ExperimentConfig c;
    c.problem = "III.10.19";
    c.schedule = PopulationSchedule::constant(target);
    c.time_limit_s = 60;
    scaling_runs.push_back(run_one(c, 7));
    const RunRecord& r = scaling_runs.back();
    info(fmt::format("target {:>6}: {} generations, product {:.3g}, wall {:.1f} s", target, r.generations_completed(),
                     static_cast<double>(r.generations_completed()) * target, r.wall_time_s));
  }
  return scaling_runs;
}

Outcome inverse_scaling() {
  const auto& runs = scaling_records();
  std::vector<double> product;
  const std::vector<int> targets{100, 1000, 10000, 100000};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    product.push_back(static_cast<double>(runs[i].generations_completed()) * targets[i]);
  }
  const double lo = std::min({product[1], product[2], product[3]});
  const double hi = std::max({product[1], product[2], product[3]});
  const bool flat = hi / lo < 2.0;
  // "Measurably below": at least 10% under the smallest of the other three.
  const bool degraded = product[0] <= 0.9 * lo;
  return {flat && degraded,
          fmt::format("products 1K/10K/100K span {:.2f}x (need < 2); target 100 at {:.2f} of their minimum (need <= 0.90)",
                      hi / lo, product[0] / lo)};
}

Outcome evaluation_accounting() {
  const auto& runs = scaling_records();
  int exact = 0;
  for (const RunRecord& r : runs) {
    std::uint64_t cases = 0, models = 0;
    for (const GenerationLog& g : r.generations) {
      cases += g.alive_count * static_cast<std::uint64_t>(r.batch_size);
      models += g.alive_count;
    }
    exact += cases == r.totals.total_case_evaluations && models == r.totals.total_model_evaluations;
  }
  return {exact == static_cast<int>(runs.size()),
          fmt::format("{}/{} runs: total_case_evaluations equals sum of alive_count x batch_size", exact, runs.size())};
}

// --- 9 -----------------------------------------------------------------------
Outcome step_transition() {
  ExperimentConfig c;
  c.problem = "I.11.19";
  c.schedule = PopulationSchedule::parse("0:50000,20:1500");
  c.time_limit_s = 3600;
  c.max_generations = 30;
  const RunRecord r = run_one(c, 9);
  int reached = -1;
  std::string trace;
  for (const GenerationLog& g : r.generations) {
    if (g.generation >= 18 && g.generation <= 27) trace += fmt::format(" g{}:{}", g.generation, g.alive_count);
    if (reached < 0 && g.generation >= 20 && std::abs(static_cast<double>(g.alive_count) / 1500.0 - 1.0) <= 0.1) {
      reached = g.generation;
    }
  }
  info("alive counts" + trace);
  return {reached >= 0 && reached <= 26,
          reached < 0 ? std::string("never within 10% of 1500")
                      : fmt::format("within 10% of 1500 at generation {} (need <= 26)", reached)};
}

// --- 10 ----------------------------------------------------------------------
Outcome end_to_end() {
  std::string detail;
  bool pass = true;
  for (const char* problem : {"I.11.19", "III.10.19"}) {
    ExperimentConfig c;
    c.problem = problem;
    c.schedule = PopulationSchedule::constant(10000);
    c.time_limit_s = 120;
    c.repeats = 10;
    c.base_seed = 1000;
    const auto records = run_many(c, [](const RunRecord& r) {
      info(fmt::format("{} seed {}: {} generations, best score {:.6g}, max test error {:.3g}, {}", r.problem, r.seed,
                       r.generations_completed(), r.best_score, r.verdict.max_relative_error,
                       r.verdict.solved ? "solved" : "unsolved"));
    });
    const Summary s = summarize(records);
    pass = pass && s.solved >= 3;
    detail += fmt::format("{}{} solved {}/10", detail.empty() ? "" : ", ", problem, s.solved);
  }
  return {pass, detail + " (need >= 3/10 each)"};
}

// --- 11 ----------------------------------------------------------------------
Outcome validation_sharpness() {
  int truth_ok = 0, scaled_fail = 0, total = 0;
  for (const ProblemSpec& spec : registry()) {
    const std::string& rpn = truth_genomes().at(spec.id);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Dataset d = generate_dataset(spec, seed);
      ++total;
      truth_ok += validate_model(parse_text(rpn), d.test).solved;
      scaled_fail += !validate_model(parse_text(rpn + " 1.002 *"), d.test).solved;
    }
  }
  return {truth_ok == total && scaled_fail == total,
          fmt::format("truth genomes solved on {}/{} datasets, 1.002-scaled rejected on {}/{}", truth_ok, total,
                      scaled_fail, total)};
}

// --- 12 ----------------------------------------------------------------------
Outcome wilson() {
  const double center = wilson_interval(15, 30).center;
  const double lo0 = wilson_interval(0, 30).lo;
  double lo = 0, hi = 0;
  oracle::wilson(25, 30, 1.96, lo, hi);
  const WilsonInterval w = wilson_interval(25, 30);
  const double err = std::max(std::abs(w.lo - lo), std::abs(w.hi - hi));
  return {center == 0.5 && std::abs(lo0) <= 1e-12 && err <= 1e-12,
          fmt::format("center(15,30) = {}, lo(0,30) = {}, (25,30) = [{:.12f}, {:.12f}] off by {:.1e}", center, lo0,
                      w.lo, w.hi, err)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "Fitness formula exactness", fitness_formula},
      {2, "Genome viability fuzz", genome_viability},
      {3, "VM oracle equivalence", vm_oracle},
      {4, "Population stability", population_stability},
      {5, "Ranking mimicry", ranking_mimicry},
      {6, "Sort-free selection speed", selection_speed},
      {7, "Inverse scaling", inverse_scaling},
      {8, "Evaluation accounting", evaluation_accounting},
      {9, "Step transition", step_transition},
      {10, "End-to-end solvability", end_to_end},
      {11, "Validation criterion sharpness", validation_sharpness},
      {12, "Wilson interval", wilson},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

  int failed = 0, ran = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    ++ran;
    failed += !out.pass;
    fmt::print("{} {:>2}. {}: {} [{:.1f} s]\n", out.pass ? "PASS" : "FAIL", c.id, c.title, out.detail,
               seconds_since(t0));
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
