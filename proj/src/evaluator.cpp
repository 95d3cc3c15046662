#include "rpnlgp/evaluator.hpp"

#include <algorithm>
#include <cstdint>
#include <thread>

#include <tbb/blocked_range.h>
#include <tbb/enumerable_thread_specific.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include "rpnlgp/detail/ops.hpp"
#include "rpnlgp/errors.hpp"

namespace rpnlgp {

namespace {

// Live lanes always hold finite values, so an operator only needs to report
// whether it produced a non-finite result. sin, cos, atan and tanh cannot.
constexpr bool may_break(OpCode op) {
  return op != OpCode::Sin && op != OpCode::Cos && op != OpCode::Atan && op != OpCode::Tanh;
}

template <OpCode Op>
bool unary_column(double* a, std::size_t n) {
  bool bad = false;
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = detail::apply_unary(Op, a[i]);
    if constexpr (may_break(Op)) bad |= !detail::finite(a[i]);
  }
  return bad;
}

template <OpCode Op>
bool binary_column(double* a, const double* b, std::size_t n) {
  bool bad = false;
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = detail::apply_binary(Op, a[i], b[i]);
    bad |= !detail::finite(a[i]);
  }
  return bad;
}

bool apply_unary_column(OpCode op, double* a, std::size_t n) {
  switch (op) {
    case OpCode::Sq: return unary_column<OpCode::Sq>(a, n);
    case OpCode::Sqrt: return unary_column<OpCode::Sqrt>(a, n);
    case OpCode::Inv: return unary_column<OpCode::Inv>(a, n);
    case OpCode::Cos: return unary_column<OpCode::Cos>(a, n);
    case OpCode::Sin: return unary_column<OpCode::Sin>(a, n);
    case OpCode::Tan: return unary_column<OpCode::Tan>(a, n);
    case OpCode::Acos: return unary_column<OpCode::Acos>(a, n);
    case OpCode::Asin: return unary_column<OpCode::Asin>(a, n);
    case OpCode::Atan: return unary_column<OpCode::Atan>(a, n);
    case OpCode::Tanh: return unary_column<OpCode::Tanh>(a, n);
    case OpCode::Log: return unary_column<OpCode::Log>(a, n);
    case OpCode::Exp: return unary_column<OpCode::Exp>(a, n);
    default: return false;
  }
}

bool apply_binary_column(OpCode op, double* a, const double* b, std::size_t n) {
  switch (op) {
    case OpCode::Add: return binary_column<OpCode::Add>(a, b, n);
    case OpCode::Sub: return binary_column<OpCode::Sub>(a, b, n);
    case OpCode::Mul: return binary_column<OpCode::Mul>(a, b, n);
    case OpCode::Div: return binary_column<OpCode::Div>(a, b, n);
    default: return false;
  }
}

// Drops every lane whose value in `column` is non-finite from all `depth`
// stack columns and from the lane map. Returns the new live count.
std::size_t compact(double* stack, std::size_t stride, std::size_t depth, const double* column,
                    std::uint32_t* lanes, std::size_t live) {
  std::size_t kept = 0;
  for (std::size_t j = 0; j < live; ++j) {
    if (!detail::finite(column[j])) continue;
    if (kept != j) {
      for (std::size_t d = 0; d < depth; ++d) stack[d * stride + kept] = stack[d * stride + j];
      lanes[kept] = lanes[j];
    }
    ++kept;
  }
  return kept;
}

std::size_t max_depth(const Genome& g) {
  int depth = 0, peak = 0;
  for (const Instruction& ins : g.code) {
    depth += ins.net_effect();
    peak = std::max(peak, depth);
  }
  return static_cast<std::size_t>(peak);
}

constexpr std::size_t kGrain = 8;

}  // namespace

void eval_cases(const Genome& genome, const DatasetBatch& batch, KernelScratch& scratch,
                std::span<EvalOutcome> out) {
  const auto n = static_cast<std::size_t>(batch.n_cases());
  const std::size_t depth = max_depth(genome);
  if (scratch.stack.size() < depth * n) scratch.stack.resize(depth * n);
  scratch.lanes.resize(n);
  double* stack = scratch.stack.data();
  std::uint32_t* lanes = scratch.lanes.data();
  for (std::size_t i = 0; i < n; ++i) lanes[i] = static_cast<std::uint32_t>(i);
  std::fill(out.begin(), out.end(), EvalOutcome::invalid());

  // A case leaves the live set at its first non-finite intermediate, exactly
  // where the single-case VM would stop.
  std::size_t live = n;
  std::size_t top = 0;
  for (const Instruction& ins : genome.code) {
    bool bad = false;
    switch (ins.kind) {
      case Instruction::Kind::PushVar: {
        const double* col = batch.column(ins.index).data();
        double* dst = stack + top * n;
        if (live == n) {
          std::copy_n(col, n, dst);
        } else {
          for (std::size_t j = 0; j < live; ++j) dst[j] = col[lanes[j]];
        }
        ++top;
        break;
      }
      case Instruction::Kind::PushConst:
        std::fill_n(stack + top * n, live, genome.constants[ins.index]);
        ++top;
        break;
      case Instruction::Kind::Unary:
        bad = apply_unary_column(ins.op, stack + (top - 1) * n, live);
        break;
      case Instruction::Kind::Binary:
        bad = apply_binary_column(ins.op, stack + (top - 2) * n, stack + (top - 1) * n, live);
        --top;
        break;
    }
    if (bad) {
      live = compact(stack, n, top, stack + (top - 1) * n, lanes, live);
      if (live == 0) return;
    }
  }
  for (std::size_t j = 0; j < live; ++j) out[lanes[j]] = EvalOutcome::finite(stack[j]);
}

struct PopulationEvaluator::Impl {
  explicit Impl(int workers) : arena(workers), workers(workers) {}

  tbb::task_arena arena;
  tbb::enumerable_thread_specific<KernelScratch> scratch;
  int workers;
};

PopulationEvaluator::PopulationEvaluator(int workers) {
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  impl_ = std::make_unique<Impl>(workers);
}

PopulationEvaluator::~PopulationEvaluator() = default;

int PopulationEvaluator::workers() const { return impl_->workers; }

std::span<const double> PopulationEvaluator::evaluate_population(Arena& arena, const DatasetBatch& batch,
                                                                 const FitnessConfig& config) {
  return evaluate_in_chunks(arena, batch, config, std::max<std::size_t>(1, arena.alive_count()));
}

std::span<const double> PopulationEvaluator::evaluate_in_chunks(Arena& arena, const DatasetBatch& batch,
                                                                const FitnessConfig& config, std::size_t max_chunk) {
  config.check();
  if (max_chunk == 0) throw UsageError("max_chunk must be >= 1");
  const std::span<const SlotId> alive = arena.alive();
  const std::size_t count = alive.size();
  const auto n = static_cast<std::size_t>(batch.n_cases());
  scores_.resize(count);
  std::size_t fresh = count;
  if (reuse_scores_) {
    fresh = 0;
    for (SlotId s : alive) fresh += !arena[s].evaluated;
  }

  auto score_range = [&](std::size_t begin, std::size_t end) {
    KernelScratch& scratch = impl_->scratch.local();
    scratch.outcomes.resize(n);
    for (std::size_t i = begin; i < end; ++i) {
      Individual& ind = arena[alive[i]];
      if (reuse_scores_ && ind.evaluated) {
        scores_[i] = ind.score;
        continue;
      }
      eval_cases(ind.genome, batch, scratch, scratch.outcomes);
      const double s = score_outcomes(scratch.outcomes, batch.targets(), config);
      ind.score = s;
      ind.evaluated = true;
      scores_[i] = s;
    }
  };

  for (std::size_t chunk = 0; chunk < count; chunk += max_chunk) {
    const std::size_t chunk_end = std::min(count, chunk + max_chunk);
    if (impl_->workers == 1) {
      score_range(chunk, chunk_end);
      continue;
    }
    impl_->arena.execute([&] {
      tbb::parallel_for(tbb::blocked_range<std::size_t>(chunk, chunk_end, kGrain),
                        [&](const tbb::blocked_range<std::size_t>& r) { score_range(r.begin(), r.end()); });
    });
  }

  stats_.total_model_evaluations += fresh;
  stats_.total_case_evaluations += fresh * n;
  return scores_;
}

}  // namespace rpnlgp
