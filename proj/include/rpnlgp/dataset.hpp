#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rpnlgp/genome.hpp"

namespace rpnlgp {

inline constexpr int kMaxCasesPerBatch = 1024;

/// Fitness cases for one evaluation round. Inputs are stored column-major
/// (one contiguous column per variable) so the batched kernel streams them.
class DatasetBatch {
 public:
  DatasetBatch() = default;

  /// `rows` holds n_cases rows of `arity` inputs each. Throws UsageError on
  /// shape mismatch, an empty batch, or more than kMaxCasesPerBatch cases.
  DatasetBatch(int arity, std::span<const double> rows, std::span<const EvalOutcome> targets);

  int arity() const { return arity_; }
  int n_cases() const { return n_cases_; }

  std::span<const double> column(int var) const {
    return {columns_.data() + static_cast<std::size_t>(var) * static_cast<std::size_t>(n_cases_),
            static_cast<std::size_t>(n_cases_)};
  }
  double input(int row, int var) const { return column(var)[static_cast<std::size_t>(row)]; }
  std::vector<double> row(int row) const;

  std::span<const EvalOutcome> targets() const { return targets_; }

  /// First `n` cases as a new batch.
  DatasetBatch head(int n) const;

 private:
  int arity_ = 0;
  int n_cases_ = 0;
  std::vector<double> columns_;
  std::vector<EvalOutcome> targets_;
};

}  // namespace rpnlgp
