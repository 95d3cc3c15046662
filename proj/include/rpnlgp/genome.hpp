#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rpnlgp/errors.hpp"
#include "rpnlgp/random.hpp"

namespace rpnlgp {

/// Operator set of the genome language. Binary operators come first.
enum class OpCode : std::uint8_t {
  Add,
  Sub,
  Mul,
  Div,
  Sq,
  Sqrt,
  Inv,
  Cos,
  Sin,
  Tan,
  Acos,
  Asin,
  Atan,
  Tanh,
  Log,
  Exp,
};

inline constexpr int kBinaryOpCount = 4;
inline constexpr int kUnaryOpCount = 12;
inline constexpr int kOpCount = kBinaryOpCount + kUnaryOpCount;

constexpr bool is_binary(OpCode op) { return static_cast<int>(op) < kBinaryOpCount; }

/// Token used by the RPN text format (`+ - * / sq sqrt inv cos ...`).
std::string_view op_token(OpCode op);
std::optional<OpCode> op_from_token(std::string_view token);

struct Instruction {
  enum class Kind : std::uint8_t { PushVar, PushConst, Unary, Binary };

  Kind kind = Kind::PushVar;
  OpCode op = OpCode::Add;  // only meaningful for Unary/Binary
  std::uint16_t index = 0;  // variable or constant-table index for pushes

  static constexpr Instruction var(std::uint16_t i) { return {Kind::PushVar, OpCode::Add, i}; }
  static constexpr Instruction constant(std::uint16_t i) { return {Kind::PushConst, OpCode::Add, i}; }
  static constexpr Instruction apply(OpCode op) {
    return {is_binary(op) ? Kind::Binary : Kind::Unary, op, 0};
  }

  constexpr bool is_push() const { return kind == Kind::PushVar || kind == Kind::PushConst; }
  constexpr int operands() const {
    return kind == Kind::Binary ? 2 : kind == Kind::Unary ? 1 : 0;
  }
  constexpr int net_effect() const { return is_push() ? 1 : kind == Kind::Unary ? 0 : -1; }

  friend constexpr bool operator==(const Instruction& a, const Instruction& b) {
    if (a.kind != b.kind) return false;
    return a.is_push() ? a.index == b.index : a.op == b.op;
  }
};

/// A linear RPN program plus its constant table. Treated as a value.
struct Genome {
  std::vector<Instruction> code;
  std::vector<double> constants;

  std::size_t size() const { return code.size(); }
  /// Smallest input arity this genome can be evaluated against.
  int min_arity() const;

  friend bool operator==(const Genome&, const Genome&) = default;
};

/// Result of evaluating one fitness case. NaN encodes Invalid, so a span of
/// outcomes has the same layout as a span of doubles.
class EvalOutcome {
 public:
  constexpr EvalOutcome() = default;

  /// Non-finite values are mapped to Invalid.
  static EvalOutcome finite(double v) { return EvalOutcome(std::isfinite(v) ? v : kNaN); }
  static constexpr EvalOutcome invalid() { return EvalOutcome(kNaN); }

  bool is_valid() const { return !std::isnan(value_); }
  double value() const { return value_; }

  friend bool operator==(const EvalOutcome& a, const EvalOutcome& b) {
    return (!a.is_valid() && !b.is_valid()) || a.value_ == b.value_;
  }

 private:
  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  constexpr explicit EvalOutcome(double v) : value_(v) {}
  double value_ = kNaN;
};

static_assert(sizeof(EvalOutcome) == sizeof(double));

struct MutationWeights {
  double point_replace = 0.35;
  double insert = 0.15;
  double remove = 0.15;
  double constant_perturb = 0.25;
  double constant_replace = 0.10;
};

struct GenomeConfig {
  int min_length = 3;
  int max_length = 64;
  double const_min = -5.0;
  double const_max = 5.0;
  int const_count_max = 8;
  MutationWeights weights;

  /// Throws UsageError when the bounds are inconsistent.
  void check() const;
};

struct StackEffect {
  int deficit = 0;      // largest shortfall of operands seen before any instruction
  int final_depth = 0;  // plain sum of net effects
};

StackEffect stack_effect(std::span<const Instruction> code);

/// True iff the program is stack-valid (no deficit, final depth 1) and every
/// index is in range. `arity`, when given, also bounds PushVar indices.
bool validate(const Genome& genome, std::optional<int> arity = std::nullopt);
bool within_bounds(const Genome& genome, const GenomeConfig& config);

Genome random_genome(Rng& rng, const GenomeConfig& config, int arity);
Genome mutate(const Genome& genome, Rng& rng, const GenomeConfig& config, int arity);
Genome repair(Genome genome, Rng& rng, const GenomeConfig& config, int arity);

/// Single-case stack-machine evaluation.
EvalOutcome eval(const Genome& genome, std::span<const double> inputs);

std::string to_text(const Genome& genome);
/// Throws ParseError naming the 1-based token position on failure.
Genome parse_text(std::string_view text);

}  // namespace rpnlgp
