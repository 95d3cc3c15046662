#pragma once

#include <cmath>
#include <limits>

#include "rpnlgp/genome.hpp"

// Operator semantics shared by the single-case VM and the batched kernel so
// both produce bit-identical results.
namespace rpnlgp::detail {

inline constexpr double kDomainError = std::numeric_limits<double>::quiet_NaN();

inline double apply_unary(OpCode op, double a) {
  switch (op) {
    case OpCode::Sq: return a * a;
    case OpCode::Sqrt: return std::sqrt(a);
    case OpCode::Inv: return 1.0 / a;
    case OpCode::Cos: return std::cos(a);
    case OpCode::Sin: return std::sin(a);
    case OpCode::Tan: return std::tan(a);
    // Out-of-domain inputs skip libm's slow error-reporting path.
    case OpCode::Acos: return std::fabs(a) <= 1.0 ? std::acos(a) : kDomainError;
    case OpCode::Asin: return std::fabs(a) <= 1.0 ? std::asin(a) : kDomainError;
    case OpCode::Atan: return std::atan(a);
    case OpCode::Tanh: return std::tanh(a);
    case OpCode::Log: return std::log(a);
    case OpCode::Exp: return std::exp(a);
    default: return a;
  }
}

inline double apply_binary(OpCode op, double a, double b) {
  switch (op) {
    case OpCode::Add: return a + b;
    case OpCode::Sub: return a - b;
    case OpCode::Mul: return a * b;
    case OpCode::Div: return a / b;
    default: return a;
  }
}

/// Same answer as std::isfinite but vectorizes; relies on strict IEEE semantics.
inline bool finite(double x) { return (x - x) == 0.0; }

}  // namespace rpnlgp::detail
