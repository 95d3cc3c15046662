#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "rpnlgp/dataset.hpp"
#include "rpnlgp/fitness.hpp"
#include "rpnlgp/genome.hpp"

namespace rpnlgp {

using SlotId = std::uint32_t;

struct Individual {
  SlotId slot_id = 0;
  Genome genome;
  double score = std::numeric_limits<double>::quiet_NaN();
  bool evaluated = false;  // score belongs to the current genome
  bool alive = false;
  int birth_generation = 0;
};

/// Fixed-capacity individual storage. Dead slots go to a LIFO dead pool and
/// are handed out again before any never-used slot; nothing is freed.
class Arena {
 public:
  explicit Arena(std::size_t capacity);

  /// Throws CapacityError when no free slot remains.
  SlotId acquire();
  /// Throws UsageError unless the slot is alive.
  void release(SlotId slot);

  Individual& operator[](SlotId slot) { return slots_[slot]; }
  const Individual& operator[](SlotId slot) const { return slots_[slot]; }

  /// Alive slot ids in arena order (swap-remove on release, append on acquire).
  std::span<const SlotId> alive() const { return alive_; }
  std::size_t alive_count() const { return alive_.size(); }
  std::size_t capacity() const { return slots_.size(); }
  std::size_t dead_pool_size() const { return dead_pool_.size(); }
  std::size_t never_used() const { return slots_.size() - touched_; }
  /// Number of slots ever brought into use. Stays flat once the arena is warm.
  std::size_t fresh_slot_count() const { return touched_; }

 private:
  static constexpr std::uint32_t kNotAlive = std::numeric_limits<std::uint32_t>::max();

  std::vector<Individual> slots_;
  std::vector<SlotId> dead_pool_;
  std::vector<SlotId> alive_;
  std::vector<std::uint32_t> alive_pos_;
  std::size_t touched_ = 0;
};

struct EvalStats {
  std::uint64_t total_model_evaluations = 0;
  std::uint64_t total_case_evaluations = 0;
};

/// Per-worker buffers for the batched kernel.
struct KernelScratch {
  std::vector<double> stack;
  std::vector<std::uint32_t> lanes;  // original case index of each live lane
  std::vector<EvalOutcome> outcomes;
};

/// Runs one genome over every case of the batch, column by column.
/// Bit-identical to calling eval() once per case.
void eval_cases(const Genome& genome, const DatasetBatch& batch, KernelScratch& scratch,
                std::span<EvalOutcome> out);

/// Parallel population scorer. The individual is the unit of outer
/// parallelism and the fitness case the unit of inner work; results do not
/// depend on worker count or chunking.
class PopulationEvaluator {
 public:
  /// `workers` <= 0 selects the hardware concurrency.
  explicit PopulationEvaluator(int workers = 0);
  ~PopulationEvaluator();
  PopulationEvaluator(const PopulationEvaluator&) = delete;
  PopulationEvaluator& operator=(const PopulationEvaluator&) = delete;

  /// Scores every alive individual; the returned span follows arena.alive()
  /// order and stays valid until the next call.
  std::span<const double> evaluate_population(Arena& arena, const DatasetBatch& batch, const FitnessConfig& config);
  /// Same results, dispatching at most `max_chunk` individuals at a time.
  std::span<const double> evaluate_in_chunks(Arena& arena, const DatasetBatch& batch, const FitnessConfig& config,
                                             std::size_t max_chunk);

  const EvalStats& stats() const { return stats_; }
  int workers() const;

  /// When on, individuals already scored on this batch keep their score and
  /// are not counted as evaluated. Off by default so every alive individual
  /// is scored (and counted) each call. Only valid with an unchanging batch.
  void set_reuse_scores(bool on) { reuse_scores_ = on; }
  bool reuse_scores() const { return reuse_scores_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  EvalStats stats_;
  std::vector<double> scores_;
  bool reuse_scores_ = false;
};

}  // namespace rpnlgp
