#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rpnlgp/dataset.hpp"
#include "rpnlgp/genome.hpp"

namespace rpnlgp {

struct VariableRange {
  double lo = 1.0;
  double hi = 5.0;
};

/// One Feynman benchmark equation. Inputs are ordered as `variable_names`;
/// physical constants are ordinary sampled inputs.
struct ProblemSpec {
  std::string id;   // e.g. "I.11.19"
  int eq_number = 0;
  std::string expression;
  std::vector<std::string> variable_names;
  std::vector<VariableRange> variable_ranges;
  std::function<double(std::span<const double>)> truth;

  int arity() const { return static_cast<int>(variable_names.size()); }
};

/// The seven benchmark problems, in table order.
const std::vector<ProblemSpec>& registry();
/// Accepts the Feynman id ("III.10.19") or the equation number ("91", "eq91").
const ProblemSpec& find_problem(std::string_view key);

inline constexpr int kTrainCases = 512;
inline constexpr int kTestCases = 128;

struct Dataset {
  DatasetBatch train;
  DatasetBatch test;
  std::uint64_t seed = 0;
};

/// 640 i.i.d. uniform samples: the first 512 train, the last 128 test.
Dataset generate_dataset(const ProblemSpec& spec, std::uint64_t seed);

inline constexpr double kSolvedRelativeError = 1e-3;
inline constexpr double kRelativeErrorGuard = 1e-12;

struct Verdict {
  bool solved = false;
  double max_relative_error = 0.0;  // +inf when the model is invalid on a valid target
  std::optional<int> failing_case_index;
};

/// Solved iff every test case has relative error < 0.1% (and the model is
/// valid wherever the target is).
Verdict validate_model(const Genome& genome, const DatasetBatch& test);

/// CSV with header `x0,...,x{d-1},y`; invalid targets are written as `nan`.
void write_csv(const DatasetBatch& batch, const std::filesystem::path& path);
DatasetBatch read_csv(const std::filesystem::path& path);

}  // namespace rpnlgp
