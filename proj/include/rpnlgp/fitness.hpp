#pragma once

#include <span>

#include "rpnlgp/dataset.hpp"
#include "rpnlgp/genome.hpp"

namespace rpnlgp {

/// Case-pair accounting. `c1` counts valid/invalid pairs (exactly one side
/// invalid), `c2` invalid/invalid pairs.
struct PairTally {
  int n_valid = 0;
  int c1 = 0;
  int c2 = 0;
  int total = 0;

  friend bool operator==(const PairTally&, const PairTally&) = default;
};

struct CorrelationResult {
  double r = 0.0;
  bool degenerate = true;
};

struct FitnessConfig {
  double max_score = 1000.0;  // M
  int batch_size = 512;

  void check() const;
};

/// One-pass (Welford) co-moment accumulator for Pearson's r.
class CorrelationAccumulator {
 public:
  void add(double x, double y) {
    ++n_;
    const double dx = x - mean_x_;
    mean_x_ += dx / static_cast<double>(n_);
    const double dy = y - mean_y_;
    mean_y_ += dy / static_cast<double>(n_);
    sxx_ += dx * (x - mean_x_);
    syy_ += dy * (y - mean_y_);
    sxy_ += dx * (y - mean_y_);
  }

  long count() const { return n_; }
  double mean_x() const { return mean_x_; }
  double mean_y() const { return mean_y_; }

  /// r = 0 and degenerate when fewer than two pairs or either side has zero variance.
  CorrelationResult result() const;

 private:
  long n_ = 0;
  double mean_x_ = 0.0, mean_y_ = 0.0;
  double sxx_ = 0.0, syy_ = 0.0, sxy_ = 0.0;
};

/// Throws UsageError on length mismatch or empty input.
PairTally tally(std::span<const EvalOutcome> model, std::span<const EvalOutcome> target);
/// Pearson r over the cases where both sides are valid.
CorrelationResult correlation(std::span<const EvalOutcome> model, std::span<const EvalOutcome> target);

/// score = M r^4 (N - (c1 + c2)) - M (c1 - c2)
double score(const CorrelationResult& corr, const PairTally& tally, const FitnessConfig& config);

/// tally + correlation + score fused into a single pass.
double score_outcomes(std::span<const EvalOutcome> model, std::span<const EvalOutcome> target,
                      const FitnessConfig& config);

double fitness_of(const Genome& genome, const DatasetBatch& batch, const FitnessConfig& config);

}  // namespace rpnlgp
