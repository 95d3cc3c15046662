#include "rpnlgp/genome.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cctype>
#include <charconv>
#include <cstdio>

#include "rpnlgp/detail/ops.hpp"

namespace rpnlgp {

namespace {

constexpr std::array<std::string_view, kOpCount> kTokens = {
    "+", "-", "*", "/", "sq", "sqrt", "inv", "cos", "sin", "tan", "acos", "asin", "atan", "tanh", "log", "exp",
};

constexpr std::size_t kInlineStack = 128;

}  // namespace

std::string_view op_token(OpCode op) { return kTokens[static_cast<std::size_t>(op)]; }

std::optional<OpCode> op_from_token(std::string_view token) {
  for (std::size_t i = 0; i < kTokens.size(); ++i) {
    if (kTokens[i] == token) return static_cast<OpCode>(i);
  }
  return std::nullopt;
}

int Genome::min_arity() const {
  int arity = 0;
  for (const Instruction& ins : code) {
    if (ins.kind == Instruction::Kind::PushVar) arity = std::max(arity, ins.index + 1);
  }
  return arity;
}

void GenomeConfig::check() const {
  if (min_length < 1 || min_length > max_length) {
    throw UsageError("genome length bounds must satisfy 1 <= min_length <= max_length");
  }
  if (!(const_min < const_max) || !std::isfinite(const_min) || !std::isfinite(const_max)) {
    throw UsageError("constant range must be a non-empty finite interval");
  }
  if (const_count_max < 0 || const_count_max > 0xffff) {
    throw UsageError("const_count_max out of range");
  }
  const MutationWeights& w = weights;
  const double total = w.point_replace + w.insert + w.remove + w.constant_perturb + w.constant_replace;
  if (w.point_replace < 0 || w.insert < 0 || w.remove < 0 || w.constant_perturb < 0 || w.constant_replace < 0 ||
      !(total > 0)) {
    throw UsageError("mutation weights must be non-negative with a positive sum");
  }
}

StackEffect stack_effect(std::span<const Instruction> code) {
  StackEffect effect;
  for (const Instruction& ins : code) {
    effect.deficit = std::max(effect.deficit, ins.operands() - effect.final_depth);
    effect.final_depth += ins.net_effect();
  }
  return effect;
}

bool validate(const Genome& genome, std::optional<int> arity) {
  if (genome.code.empty()) return false;
  const StackEffect effect = stack_effect(genome.code);
  if (effect.deficit > 0 || effect.final_depth != 1) return false;
  for (const Instruction& ins : genome.code) {
    if (ins.kind == Instruction::Kind::PushConst && ins.index >= genome.constants.size()) return false;
    if (ins.kind == Instruction::Kind::PushVar && arity && ins.index >= *arity) return false;
  }
  return std::all_of(genome.constants.begin(), genome.constants.end(), [](double c) { return std::isfinite(c); });
}

bool within_bounds(const Genome& genome, const GenomeConfig& config) {
  const auto n = static_cast<int>(genome.size());
  return n >= config.min_length && n <= config.max_length;
}

EvalOutcome eval(const Genome& genome, std::span<const double> inputs) {
  std::array<double, kInlineStack> inline_stack;
  std::vector<double> heap_stack;
  double* stack = inline_stack.data();
  if (genome.code.size() > kInlineStack) {
    heap_stack.resize(genome.code.size());
    stack = heap_stack.data();
  }

  std::size_t top = 0;
  for (const Instruction& ins : genome.code) {
    double v = 0.0;
    switch (ins.kind) {
      case Instruction::Kind::PushVar:
        assert(ins.index < inputs.size());
        v = inputs[ins.index];
        ++top;
        break;
      case Instruction::Kind::PushConst:
        v = genome.constants[ins.index];
        ++top;
        break;
      case Instruction::Kind::Unary:
        assert(top >= 1);
        v = detail::apply_unary(ins.op, stack[top - 1]);
        break;
      case Instruction::Kind::Binary:
        assert(top >= 2);
        v = detail::apply_binary(ins.op, stack[top - 2], stack[top - 1]);
        --top;
        break;
    }
    if (!std::isfinite(v)) return EvalOutcome::invalid();
    stack[top - 1] = v;
  }
  assert(top == 1);
  return EvalOutcome::finite(stack[0]);
}

std::string to_text(const Genome& genome) {
  std::string out;
  char buf[32];
  for (const Instruction& ins : genome.code) {
    if (!out.empty()) out.push_back(' ');
    switch (ins.kind) {
      case Instruction::Kind::PushVar:
        out.push_back('x');
        out += std::to_string(ins.index);
        break;
      case Instruction::Kind::PushConst:
        std::snprintf(buf, sizeof buf, "%.17g", genome.constants[ins.index]);
        out += buf;
        break;
      default:
        out += op_token(ins.op);
        break;
    }
  }
  return out;
}

Genome parse_text(std::string_view text) {
  Genome genome;
  int depth = 0;
  std::size_t position = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    std::size_t end = i;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
    const std::string_view token = text.substr(i, end - i);
    i = end;
    ++position;

    Instruction ins;
    if (auto op = op_from_token(token)) {
      ins = Instruction::apply(*op);
    } else if (token.size() > 1 && token[0] == 'x' &&
               std::all_of(token.begin() + 1, token.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      unsigned index = 0;
      auto [ptr, ec] = std::from_chars(token.data() + 1, token.data() + token.size(), index);
      if (ec != std::errc{} || index > 0xffff) throw ParseError(position, "variable index out of range");
      ins = Instruction::var(static_cast<std::uint16_t>(index));
    } else {
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
      if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(value)) {
        throw ParseError(position, "unknown token '" + std::string(token) + "'");
      }
      if (genome.constants.size() >= 0xffff) throw ParseError(position, "too many constants");
      ins = Instruction::constant(static_cast<std::uint16_t>(genome.constants.size()));
      genome.constants.push_back(value);
    }

    if (depth < ins.operands()) {
      throw ParseError(position, "operand deficit: '" + std::string(token) + "' needs " +
                                     std::to_string(ins.operands()) + " operand(s), stack has " +
                                     std::to_string(depth));
    }
    depth += ins.net_effect();
    genome.code.push_back(ins);
  }
  if (genome.code.empty()) throw ParseError(1, "empty program");
  if (depth != 1) {
    throw ParseError(position, "program leaves " + std::to_string(depth) + " values on the stack, expected 1");
  }
  return genome;
}

}  // namespace rpnlgp
