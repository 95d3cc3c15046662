#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rpnlgp/evaluator.hpp"
#include "rpnlgp/genome.hpp"
#include "rpnlgp/random.hpp"

namespace rpnlgp {

/// Ascending fitness scores of a small uniform sample of the population.
struct MicrocosmTable {
  std::vector<double> sorted_scores;

  std::size_t size() const { return sorted_scores.size(); }
  bool empty() const { return sorted_scores.empty(); }
  /// Every sampled score is identical.
  bool flat() const { return !empty() && sorted_scores.front() == sorted_scores.back(); }
};

struct ScheduleStep {
  int from_generation = 0;
  int target_size = 0;

  friend bool operator==(const ScheduleStep&, const ScheduleStep&) = default;
};

/// Piecewise-constant target population size.
class PopulationSchedule {
 public:
  PopulationSchedule() = default;
  /// Throws UsageError unless the steps start at generation 0, are strictly
  /// increasing and every target is >= 2.
  explicit PopulationSchedule(std::vector<ScheduleStep> steps);

  static PopulationSchedule constant(int target);
  /// Parses `gen:size,gen:size,...`, e.g. `0:5000000,20:100000`.
  static PopulationSchedule parse(std::string_view text);

  std::span<const ScheduleStep> steps() const { return steps_; }
  int max_target() const;
  std::string to_string() const;

  friend bool operator==(const PopulationSchedule&, const PopulationSchedule&) = default;

 private:
  std::vector<ScheduleStep> steps_;
};

int target_for_generation(const PopulationSchedule& schedule, int generation);

struct ControlParams {
  int microcosm_size = 100;   // k
  double weight_slope = 2.0;  // w(p) = slope * p
  int max_offspring_per_individual = 4;

  void check() const;
};

struct GenerationDelta {
  std::size_t alive_before = 0;
  std::size_t deaths = 0;
  std::size_t survivors = 0;
  std::size_t births = 0;
  std::size_t alive_after = 0;
};

using MutateFn = std::function<Genome(const Genome&, Rng&)>;

/// Up to k scores drawn uniformly without replacement, sorted ascending.
MicrocosmTable sample_microcosm(std::span<const double> scores, Rng& rng, int k);
MicrocosmTable sample_microcosm(const Arena& arena, Rng& rng, int k);

/// Fraction of table entries strictly below `score`.
double percentile_of(double score, const MicrocosmTable& table);

/// Percentile fed to the weight function: percentile_of, except that a flat
/// table maps everything to 0.5.
double selection_percentile(double score, const MicrocosmTable& table);

/// Population-wide multiplier on w(p) so that the expected next population
/// size equals `target`.
double control_gain(const MicrocosmTable& table, std::size_t alive_count, int target, const ControlParams& params);

/// floor(e) + Bernoulli(frac(e)) copies for e = gain * w(p), capped.
int offspring_count(double percentile, double gain, Rng& rng, const ControlParams& params);

/// Sort-free single pass: copies[i] for every scores[i].
void plan_offspring(std::span<const double> scores, const MicrocosmTable& table, double gain, Rng& rng,
                    const ControlParams& params, std::span<std::uint8_t> copies);

/// Reference ranking selection: exact percentiles from a full sort, then the
/// same copy rule. Kept as the test and benchmark baseline.
void rank_offspring_baseline(std::span<const double> scores, double gain, Rng& rng, const ControlParams& params,
                             std::span<std::uint8_t> copies);

/// Selection, death and birth for one generation. Individuals with zero
/// copies are released; the others survive and spawn copies - 1 mutated
/// children (score unset, birth_generation = `generation` + 1).
class PopulationController {
 public:
  explicit PopulationController(ControlParams params = {});

  GenerationDelta step_population(Arena& arena, const MicrocosmTable& table, int target, Rng& rng,
                                  const MutateFn& mutate_fn, int generation = 0);

  const ControlParams& params() const { return params_; }

 private:
  ControlParams params_;
  std::vector<SlotId> snapshot_;
  std::vector<double> scores_;
  std::vector<std::uint8_t> copies_;
};

/// Convenience wrapper around a one-shot PopulationController.
GenerationDelta step_population(Arena& arena, const MicrocosmTable& table, int target, Rng& rng,
                                const ControlParams& params, const MutateFn& mutate_fn, int generation = 0);

}  // namespace rpnlgp
