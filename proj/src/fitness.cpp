#include "rpnlgp/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace rpnlgp {

namespace {

void check_lengths(std::span<const EvalOutcome> model, std::span<const EvalOutcome> target) {
  if (model.size() != target.size()) {
    throw UsageError("model and target outcome vectors differ in length (" + std::to_string(model.size()) +
                     " vs " + std::to_string(target.size()) + ")");
  }
  if (model.empty()) throw UsageError("outcome vectors must not be empty");
}

}  // namespace

void FitnessConfig::check() const {
  if (!(max_score > 0) || !std::isfinite(max_score)) throw UsageError("max score M must be positive");
  if (batch_size < 1 || batch_size > kMaxCasesPerBatch) throw UsageError("batch size must be in [1, 1024]");
}

CorrelationResult CorrelationAccumulator::result() const {
  if (n_ < 2 || !(sxx_ > 0.0) || !(syy_ > 0.0)) return {0.0, true};
  const double r = sxy_ / std::sqrt(sxx_ * syy_);
  if (!std::isfinite(r)) return {0.0, true};
  return {std::clamp(r, -1.0, 1.0), false};
}

PairTally tally(std::span<const EvalOutcome> model, std::span<const EvalOutcome> target) {
  check_lengths(model, target);
  PairTally t;
  t.total = static_cast<int>(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    const bool m = model[i].is_valid();
    const bool y = target[i].is_valid();
    if (m && y) {
      ++t.n_valid;
    } else if (m != y) {
      ++t.c1;
    } else {
      ++t.c2;
    }
  }
  return t;
}

CorrelationResult correlation(std::span<const EvalOutcome> model, std::span<const EvalOutcome> target) {
  check_lengths(model, target);
  CorrelationAccumulator acc;
  for (std::size_t i = 0; i < model.size(); ++i) {
    if (model[i].is_valid() && target[i].is_valid()) acc.add(target[i].value(), model[i].value());
  }
  return acc.result();
}

double score(const CorrelationResult& corr, const PairTally& tally, const FitnessConfig& config) {
  const double r = corr.degenerate ? 0.0 : corr.r;
  const double r2 = r * r;
  const double m = config.max_score;
  return m * (r2 * r2) * static_cast<double>(tally.total - (tally.c1 + tally.c2)) -
         m * static_cast<double>(tally.c1 - tally.c2);
}

double score_outcomes(std::span<const EvalOutcome> model, std::span<const EvalOutcome> target,
                      const FitnessConfig& config) {
  check_lengths(model, target);
  PairTally t;
  t.total = static_cast<int>(model.size());
  CorrelationAccumulator acc;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const bool m = model[i].is_valid();
    const bool y = target[i].is_valid();
    if (m && y) {
      ++t.n_valid;
      acc.add(target[i].value(), model[i].value());
    } else if (m != y) {
      ++t.c1;
    } else {
      ++t.c2;
    }
  }
  return score(acc.result(), t, config);
}

double fitness_of(const Genome& genome, const DatasetBatch& batch, const FitnessConfig& config) {
  std::vector<EvalOutcome> outcomes(static_cast<std::size_t>(batch.n_cases()));
  for (int i = 0; i < batch.n_cases(); ++i) outcomes[static_cast<std::size_t>(i)] = eval(genome, batch.row(i));
  return score_outcomes(outcomes, batch.targets(), config);
}

}  // namespace rpnlgp
