#include "rpnlgp/dataset.hpp"

#include <string>

namespace rpnlgp {

DatasetBatch::DatasetBatch(int arity, std::span<const double> rows, std::span<const EvalOutcome> targets)
    : arity_(arity), n_cases_(static_cast<int>(targets.size())) {
  if (arity < 1) throw UsageError("dataset arity must be >= 1");
  if (targets.empty()) throw UsageError("dataset batch must hold at least one case");
  if (targets.size() > static_cast<std::size_t>(kMaxCasesPerBatch)) {
    throw UsageError("dataset batch holds " + std::to_string(targets.size()) + " cases, limit is " +
                     std::to_string(kMaxCasesPerBatch));
  }
  if (rows.size() != targets.size() * static_cast<std::size_t>(arity)) {
    throw UsageError("dataset rows do not match targets x arity");
  }
  const auto n = static_cast<std::size_t>(n_cases_);
  columns_.resize(rows.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t v = 0; v < static_cast<std::size_t>(arity); ++v) {
      columns_[v * n + r] = rows[r * static_cast<std::size_t>(arity) + v];
    }
  }
  targets_.assign(targets.begin(), targets.end());
}

std::vector<double> DatasetBatch::row(int row) const {
  std::vector<double> out(static_cast<std::size_t>(arity_));
  for (int v = 0; v < arity_; ++v) out[static_cast<std::size_t>(v)] = input(row, v);
  return out;
}

DatasetBatch DatasetBatch::head(int n) const {
  if (n < 1 || n > n_cases_) throw UsageError("head size out of range");
  std::vector<double> rows;
  rows.reserve(static_cast<std::size_t>(n * arity_));
  for (int r = 0; r < n; ++r) {
    for (int v = 0; v < arity_; ++v) rows.push_back(input(r, v));
  }
  return DatasetBatch(arity_, rows, targets().first(static_cast<std::size_t>(n)));
}

}  // namespace rpnlgp
