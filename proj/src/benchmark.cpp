#include "rpnlgp/benchmark.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "rpnlgp/random.hpp"

namespace rpnlgp {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<VariableRange> uniform_ranges(std::size_t n) { return std::vector<VariableRange>(n, {1.0, 5.0}); }

std::vector<ProblemSpec> build_registry() {
  std::vector<ProblemSpec> specs;

  specs.push_back({"I.11.19", 7, "x1*y1 + x2*y2 + x3*y3", {"x1", "y1", "x2", "y2", "x3", "y3"}, uniform_ranges(6),
                   [](std::span<const double> v) { return v[0] * v[1] + v[2] * v[3] + v[4] * v[5]; }});

  specs.push_back({"I.13.12", 14, "G*m1*m2*(1/r2 - 1/r1)", {"G", "m1", "m2", "r1", "r2"}, uniform_ranges(5),
                   [](std::span<const double> v) { return v[0] * v[1] * v[2] * (1.0 / v[4] - 1.0 / v[3]); }});

  // lambda / (d n) must stay within the arcsin domain.
  specs.push_back({"I.30.5", 31, "arcsin(lambda/(d*n))", {"lambda", "d", "n"}, {{1.0, 2.0}, {2.0, 5.0}, {1.0, 5.0}},
                   [](std::span<const double> v) { return std::asin(v[0] / (v[1] * v[2])); }});

  specs.push_back({"II.6.15a", 56, "3*p*z*sqrt(x^2+y^2)/(r^5*4*pi*epsilon)", {"p", "z", "x", "y", "r", "epsilon"},
                   uniform_ranges(6), [](std::span<const double> v) {
                     return 3.0 * v[0] * v[1] * std::sqrt(v[2] * v[2] + v[3] * v[3]) /
                            (std::pow(v[4], 5) * (4.0 * kPi * v[5]));
                   }});

  // theta kept inside (0, pi/2) so sin(theta) cos(theta) stays away from 0.
  specs.push_back({"II.6.15b", 57, "3*p/((4*pi*epsilon)*(r^3*sin(theta)*cos(theta)))", {"p", "epsilon", "r", "theta"},
                   {{1.0, 5.0}, {1.0, 5.0}, {1.0, 5.0}, {0.1, 1.5}}, [](std::span<const double> v) {
                     return 3.0 * v[0] / ((4.0 * kPi * v[1]) * (v[2] * v[2] * v[2] * std::sin(v[3]) * std::cos(v[3])));
                   }});

  specs.push_back({"III.4.32", 86, "1/(exp(omega*hbar/(k*T)) - 1)", {"omega", "hbar", "k", "T"}, uniform_ranges(4),
                   [](std::span<const double> v) { return 1.0 / (std::exp(v[0] * v[1] / (v[2] * v[3])) - 1.0); }});

  specs.push_back({"III.10.19", 91, "u*sqrt(Bx^2+By^2+Bz^2)", {"u", "Bx", "By", "Bz"}, uniform_ranges(4),
                   [](std::span<const double> v) { return v[0] * std::sqrt(v[1] * v[1] + v[2] * v[2] + v[3] * v[3]); }});
  return specs;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

}  // namespace

const std::vector<ProblemSpec>& registry() {
  static const std::vector<ProblemSpec> specs = build_registry();
  return specs;
}

const ProblemSpec& find_problem(std::string_view key) {
  std::string_view number = key;
  if (number.starts_with("eq") || number.starts_with("Eq")) number.remove_prefix(2);
  for (const ProblemSpec& spec : registry()) {
    if (spec.id == key || std::to_string(spec.eq_number) == number) return spec;
  }
  throw UsageError("unknown problem '" + std::string(key) + "'");
}

Dataset generate_dataset(const ProblemSpec& spec, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0xda7a));
  const auto arity = static_cast<std::size_t>(spec.arity());
  auto draw = [&](int cases, std::vector<double>& rows, std::vector<EvalOutcome>& targets) {
    rows.resize(static_cast<std::size_t>(cases) * arity);
    targets.resize(static_cast<std::size_t>(cases));
    for (std::size_t c = 0; c < static_cast<std::size_t>(cases); ++c) {
      std::span<double> row(rows.data() + c * arity, arity);
      for (std::size_t v = 0; v < arity; ++v) {
        row[v] = uniform_real(rng, spec.variable_ranges[v].lo, spec.variable_ranges[v].hi);
      }
      targets[c] = EvalOutcome::finite(spec.truth(row));
    }
  };
  std::vector<double> rows;
  std::vector<EvalOutcome> targets;
  draw(kTrainCases, rows, targets);
  DatasetBatch train(spec.arity(), rows, targets);
  draw(kTestCases, rows, targets);
  DatasetBatch test(spec.arity(), rows, targets);
  return {std::move(train), std::move(test), seed};
}

Verdict validate_model(const Genome& genome, const DatasetBatch& test) {
  if (genome.min_arity() > test.arity()) throw UsageError("genome reads more inputs than the dataset provides");
  Verdict verdict;
  verdict.solved = true;
  for (int i = 0; i < test.n_cases(); ++i) {
    const EvalOutcome y = test.targets()[static_cast<std::size_t>(i)];
    const EvalOutcome y_hat = eval(genome, test.row(i));
    double error = 0.0;
    bool pass = true;
    if (!y.is_valid()) {
      pass = !y_hat.is_valid();
    } else if (!y_hat.is_valid()) {
      error = std::numeric_limits<double>::infinity();
      pass = false;
    } else {
      error = std::abs(y_hat.value() - y.value()) / std::max(std::abs(y.value()), kRelativeErrorGuard);
      pass = error < kSolvedRelativeError;
    }
    verdict.max_relative_error = std::max(verdict.max_relative_error, error);
    if (!pass && verdict.solved) {
      verdict.solved = false;
      verdict.failing_case_index = i;
    }
  }
  return verdict;
}

void write_csv(const DatasetBatch& batch, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (int v = 0; v < batch.arity(); ++v) out << 'x' << v << ',';
  out << "y\n";
  for (int r = 0; r < batch.n_cases(); ++r) {
    for (int v = 0; v < batch.arity(); ++v) out << fmt::format("{:.17g},", batch.input(r, v));
    const EvalOutcome y = batch.targets()[static_cast<std::size_t>(r)];
    out << (y.is_valid() ? fmt::format("{:.17g}", y.value()) : std::string("nan")) << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

DatasetBatch read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw UsageError(path.string() + ": missing header");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header.back() != "y") throw UsageError(path.string() + ": header must end with y");
  const int arity = static_cast<int>(header.size()) - 1;

  std::vector<double> rows;
  std::vector<EvalOutcome> targets;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw UsageError(fmt::format("{}:{}: expected {} fields, got {}", path.string(), line_no, header.size(),
                                   cells.size()));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      double value = 0.0;
      try {
        std::size_t used = 0;
        value = std::stod(cells[i], &used);
        if (used != cells[i].size()) throw std::invalid_argument(cells[i]);
      } catch (const std::exception&) {
        throw UsageError(fmt::format("{}:{}: bad number '{}'", path.string(), line_no, cells[i]));
      }
      if (i + 1 < cells.size()) {
        rows.push_back(value);
      } else {
        targets.push_back(EvalOutcome::finite(value));
      }
    }
  }
  return DatasetBatch(arity, rows, targets);
}

}  // namespace rpnlgp
