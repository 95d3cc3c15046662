// Random construction, mutation and repair of genomes. Every entry point
// returns a stack-valid genome within the configured length bounds.

#include <algorithm>
#include <cmath>
#include <optional>

#include "rpnlgp/genome.hpp"

namespace rpnlgp {

namespace {

using Kind = Instruction::Kind;

constexpr double kVariableShare = 0.75;

OpCode random_op(Rng& rng, bool binary) {
  if (binary) return static_cast<OpCode>(uniform_index(rng, kBinaryOpCount));
  return static_cast<OpCode>(kBinaryOpCount + uniform_index(rng, kUnaryOpCount));
}

/// Emits a variable or constant push; may grow the constant table.
Instruction random_push(Rng& rng, const GenomeConfig& config, int arity, std::vector<double>& constants) {
  const bool use_const = config.const_count_max > 0 && !bernoulli(rng, kVariableShare);
  if (!use_const) return Instruction::var(static_cast<std::uint16_t>(uniform_index(rng, arity)));
  if (static_cast<int>(constants.size()) < config.const_count_max) {
    constants.push_back(uniform_real(rng, config.const_min, config.const_max));
    return Instruction::constant(static_cast<std::uint16_t>(constants.size() - 1));
  }
  return Instruction::constant(static_cast<std::uint16_t>(uniform_index(rng, constants.size())));
}

// Final depth 1 is reachable from `depth` with `remaining` instructions left.
bool can_finish(int depth, int remaining) {
  if (remaining == 0) return depth == 1;
  if (depth == 0) return true;
  return depth - 1 <= remaining;
}

/// Start index of every value left on the stack; each [start_j, start_{j+1})
/// range is a self-contained sub-expression.
std::vector<std::size_t> stack_segments(const std::vector<Instruction>& code) {
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < code.size(); ++i) {
    const Instruction& ins = code[i];
    if (ins.is_push()) {
      starts.push_back(i);
    } else if (ins.kind == Kind::Binary) {
      starts.pop_back();
    }
  }
  return starts;
}

/// Drops constants no instruction references and enforces the table cap.
void compact_constants(Genome& g, Rng& rng, const GenomeConfig& config, int arity) {
  std::vector<int> remap(g.constants.size(), -1);
  std::vector<double> kept;
  for (Instruction& ins : g.code) {
    if (ins.kind != Kind::PushConst) continue;
    int& slot = remap[ins.index];
    if (slot < 0) {
      slot = static_cast<int>(kept.size());
      kept.push_back(g.constants[ins.index]);
    }
    ins.index = static_cast<std::uint16_t>(slot);
  }
  const auto cap = static_cast<std::size_t>(config.const_count_max);
  if (kept.size() > cap) {
    for (Instruction& ins : g.code) {
      if (ins.kind != Kind::PushConst || ins.index < cap) continue;
      ins = cap == 0 ? Instruction::var(static_cast<std::uint16_t>(uniform_index(rng, arity)))
                     : Instruction::constant(static_cast<std::uint16_t>(uniform_index(rng, cap)));
    }
    kept.resize(cap);
  }
  g.constants = std::move(kept);
}

/// Length of the sub-expression whose value is produced by code[end - 1].
std::size_t subexpression_length(const std::vector<Instruction>& code, std::size_t end) {
  int need = 1;
  std::size_t i = end;
  while (need > 0) {
    --i;
    need += code[i].operands() - 1;
  }
  return end - i;
}

void shrink_to(Genome& g, std::size_t max_length) {
  while (g.code.size() > max_length) {
    const Instruction root = g.code.back();
    g.code.pop_back();
    if (root.kind != Kind::Binary) continue;
    // Keep the longer operand of the root binary.
    const std::size_t right = subexpression_length(g.code, g.code.size());
    const std::size_t left = g.code.size() - right;
    if (right >= left) {
      g.code.erase(g.code.begin(), g.code.begin() + static_cast<std::ptrdiff_t>(left));
    } else {
      g.code.resize(left);
    }
  }
}

void grow_to(Genome& g, Rng& rng, const GenomeConfig& config, int arity, std::size_t min_length) {
  while (g.code.size() < min_length) {
    const std::size_t missing = min_length - g.code.size();
    if (missing >= 2 && bernoulli(rng, 0.5)) {
      g.code.push_back(random_push(rng, config, arity, g.constants));
      g.code.push_back(Instruction::apply(random_op(rng, true)));
    } else {
      g.code.push_back(Instruction::apply(random_op(rng, false)));
    }
  }
}

Instruction random_instruction_like(const Instruction& old, Rng& rng, const GenomeConfig& config, int arity,
                                    std::vector<double>& constants) {
  switch (old.kind) {
    case Kind::PushVar:
    case Kind::PushConst:
      return random_push(rng, config, arity, constants);
    case Kind::Unary:
      return Instruction::apply(random_op(rng, false));
    case Kind::Binary:
      return Instruction::apply(random_op(rng, true));
  }
  return old;
}

Instruction random_instruction(Rng& rng, const GenomeConfig& config, int arity, std::vector<double>& constants) {
  switch (uniform_index(rng, 3)) {
    case 0: return random_push(rng, config, arity, constants);
    case 1: return Instruction::apply(random_op(rng, false));
    default: return Instruction::apply(random_op(rng, true));
  }
}

std::optional<std::size_t> random_constant_ref(const Genome& g, Rng& rng) {
  std::size_t count = 0;
  for (const Instruction& ins : g.code) count += ins.kind == Kind::PushConst;
  if (count == 0) return std::nullopt;
  std::size_t pick = uniform_index(rng, count);
  for (const Instruction& ins : g.code) {
    if (ins.kind == Kind::PushConst && pick-- == 0) return ins.index;
  }
  return std::nullopt;
}

enum class Move { PointReplace, Insert, Remove, ConstantPerturb, ConstantReplace };

Move pick_move(Rng& rng, const MutationWeights& w) {
  const double weights[] = {w.point_replace, w.insert, w.remove, w.constant_perturb, w.constant_replace};
  double total = 0;
  for (double x : weights) total += x;
  double u = uniform01(rng) * total;
  for (int i = 0; i < 5; ++i) {
    if (u < weights[i]) return static_cast<Move>(i);
    u -= weights[i];
  }
  return Move::PointReplace;
}

std::optional<Genome> apply_move(Move move, const Genome& parent, Rng& rng, const GenomeConfig& config, int arity) {
  Genome child = parent;
  const std::size_t n = child.code.size();
  switch (move) {
    case Move::PointReplace: {
      const std::size_t pos = uniform_index(rng, n);
      child.code[pos] = random_instruction_like(child.code[pos], rng, config, arity, child.constants);
      return child;
    }
    case Move::Insert: {
      if (static_cast<int>(n) >= config.max_length) return std::nullopt;
      const std::size_t pos = uniform_index(rng, n + 1);
      const Instruction ins = random_instruction(rng, config, arity, child.constants);
      child.code.insert(child.code.begin() + static_cast<std::ptrdiff_t>(pos), ins);
      return child;
    }
    case Move::Remove: {
      if (static_cast<int>(n) <= config.min_length) return std::nullopt;
      const std::size_t pos = uniform_index(rng, n);
      child.code.erase(child.code.begin() + static_cast<std::ptrdiff_t>(pos));
      return child;
    }
    case Move::ConstantPerturb: {
      const auto index = random_constant_ref(child, rng);
      if (!index) return std::nullopt;
      double& c = child.constants[*index];
      std::normal_distribution<double> noise(0.0, 0.1 * std::abs(c) + 0.01);
      const double next = c + noise(rng);
      if (!std::isfinite(next)) return std::nullopt;
      c = next;
      return child;
    }
    case Move::ConstantReplace: {
      const auto index = random_constant_ref(child, rng);
      if (!index) return std::nullopt;
      child.constants[*index] = uniform_real(rng, config.const_min, config.const_max);
      return child;
    }
  }
  return std::nullopt;
}

}  // namespace

Genome random_genome(Rng& rng, const GenomeConfig& config, int arity) {
  config.check();
  if (arity < 1) throw UsageError("random_genome requires arity >= 1");

  const auto length = static_cast<int>(
      config.min_length + uniform_index(rng, static_cast<std::uint64_t>(config.max_length - config.min_length + 1)));
  Genome g;
  g.code.reserve(static_cast<std::size_t>(length));

  // Only emit instruction classes from which a valid program of exactly
  // `length` instructions remains reachable.
  constexpr double kPushWeight = 0.5, kUnaryWeight = 0.2, kBinaryWeight = 0.3;
  int depth = 0;
  for (int i = 0; i < length; ++i) {
    const int remaining = length - i - 1;
    const bool push_ok = can_finish(depth + 1, remaining);
    const bool unary_ok = depth >= 1 && can_finish(depth, remaining);
    const bool binary_ok = depth >= 2 && can_finish(depth - 1, remaining);
    const double total = (push_ok ? kPushWeight : 0) + (unary_ok ? kUnaryWeight : 0) + (binary_ok ? kBinaryWeight : 0);
    double u = uniform01(rng) * total;
    if (push_ok && (u -= kPushWeight) < 0) {
      g.code.push_back(random_push(rng, config, arity, g.constants));
      ++depth;
    } else if (unary_ok && (u -= kUnaryWeight) < 0) {
      g.code.push_back(Instruction::apply(random_op(rng, false)));
    } else if (binary_ok) {
      g.code.push_back(Instruction::apply(random_op(rng, true)));
      --depth;
    } else {
      // Floating-point leftovers in u land here; pick any legal class.
      if (push_ok) {
        g.code.push_back(random_push(rng, config, arity, g.constants));
        ++depth;
      } else {
        g.code.push_back(Instruction::apply(random_op(rng, false)));
      }
    }
  }
  return g;
}

Genome repair(Genome genome, Rng& rng, const GenomeConfig& config, int arity) {
  config.check();
  if (arity < 1) throw UsageError("repair requires arity >= 1");

  // Out-of-range indices become fresh pushes.
  for (Instruction& ins : genome.code) {
    const bool bad_var = ins.kind == Kind::PushVar && ins.index >= arity;
    const bool bad_const = ins.kind == Kind::PushConst &&
                           (ins.index >= genome.constants.size() || !std::isfinite(genome.constants[ins.index]));
    if (bad_var || bad_const) ins = random_push(rng, config, arity, genome.constants);
  }

  // Operand deficits are filled with pushes placed right before the
  // instruction that needs them.
  std::vector<Instruction> code;
  code.reserve(genome.code.size() + 4);
  int depth = 0;
  for (const Instruction& ins : genome.code) {
    while (depth < ins.operands()) {
      code.push_back(random_push(rng, config, arity, genome.constants));
      ++depth;
    }
    code.push_back(ins);
    depth += ins.net_effect();
  }
  if (depth == 0) {
    code.push_back(random_push(rng, config, arity, genome.constants));
    depth = 1;
  }

  // Surplus values: a fair coin per extra value chooses between reducing it
  // with a binary operator and truncating one unconsumed sub-expression.
  while (depth > 1) {
    if (bernoulli(rng, 0.5)) {
      code.push_back(Instruction::apply(random_op(rng, true)));
    } else {
      const std::vector<std::size_t> starts = stack_segments(code);
      const std::size_t j = uniform_index(rng, starts.size());
      const std::size_t begin = starts[j];
      const std::size_t end = j + 1 < starts.size() ? starts[j + 1] : code.size();
      code.erase(code.begin() + static_cast<std::ptrdiff_t>(begin), code.begin() + static_cast<std::ptrdiff_t>(end));
    }
    --depth;
  }
  genome.code = std::move(code);

  shrink_to(genome, static_cast<std::size_t>(config.max_length));
  grow_to(genome, rng, config, arity, static_cast<std::size_t>(config.min_length));
  compact_constants(genome, rng, config, arity);
  return genome;
}

Genome mutate(const Genome& genome, Rng& rng, const GenomeConfig& config, int arity) {
  config.check();
  if (arity < 1) throw UsageError("mutate requires arity >= 1");

  // A handful of retries covers inapplicable moves (no constants, length at
  // a bound) and no-op draws such as replacing `+` with `+`.
  constexpr int kAttempts = 64;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    std::optional<Genome> child = apply_move(pick_move(rng, config.weights), genome, rng, config, arity);
    if (!child) continue;
    if (!validate(*child, arity) || !within_bounds(*child, config)) {
      *child = repair(std::move(*child), rng, config, arity);
    } else {
      compact_constants(*child, rng, config, arity);
    }
    if (*child != genome) return std::move(*child);
  }
  // Only reachable when the configuration admits a single program.
  return repair(genome, rng, config, arity);
}

}  // namespace rpnlgp
