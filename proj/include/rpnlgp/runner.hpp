#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rpnlgp/benchmark.hpp"
#include "rpnlgp/evaluator.hpp"
#include "rpnlgp/fitness.hpp"
#include "rpnlgp/genome.hpp"
#include "rpnlgp/selection.hpp"

namespace rpnlgp {

struct ExperimentConfig {
  std::string problem = "I.11.19";
  PopulationSchedule schedule = PopulationSchedule::constant(1000);
  double time_limit_s = 120.0;
  int batch_size = 512;
  int repeats = 30;
  std::uint64_t base_seed = 1;
  GenomeConfig genome;
  FitnessConfig fitness;
  ControlParams control;
  std::filesystem::path output_dir;
  int workers = 0;               // evaluator threads per run, 0 = hardware
  std::size_t max_chunk = 0;     // 0 = whole population per dispatch
  int max_generations = 0;       // 0 = bounded by time only
  int parallel_runs = 1;         // independent runs in flight in run_many
  double arena_headroom = 2.0;   // arena capacity = headroom * max target
  bool reuse_survivor_scores = false;  // skip re-scoring unchanged survivors

  /// Throws UsageError on invalid settings.
  void check() const;
};

struct GenerationLog {
  int generation = 0;
  std::size_t alive_count = 0;
  int target = 0;  // target the evaluated population was steered toward
  double best_score = 0.0;
  double elapsed_s = 0.0;
};

struct RunRecord {
  std::string problem;
  std::string schedule;
  std::uint64_t seed = 0;
  double time_limit_s = 0.0;
  int batch_size = 0;
  bool reuse_survivor_scores = false;  // totals then count only fresh scores
  std::vector<GenerationLog> generations;
  EvalStats totals;
  std::string best_genome;  // empty when no generation ran
  double best_score = 0.0;
  Verdict verdict;
  std::string diagnostic;  // set when the run ended abnormally
  double wall_time_s = 0.0;

  int generations_completed() const { return static_cast<int>(generations.size()); }
};

RunRecord run_one(const ExperimentConfig& config, std::uint64_t seed);

struct WilsonInterval {
  double lo = 0.0;
  double hi = 0.0;
  double center = 0.0;
};

/// Wilson score interval for a binomial proportion, clamped to [0, 1].
WilsonInterval wilson_interval(int successes, int n, double z = 1.96);

struct Summary {
  std::string problem;
  std::string schedule;
  int solved = 0;
  int repeats = 0;
  WilsonInterval interval;
  std::vector<int> generations;
  std::vector<std::uint64_t> model_evaluations;
  std::vector<std::uint64_t> case_evaluations;
};

/// Aggregates records that share a (problem, schedule) configuration.
Summary summarize(std::span<const RunRecord> records);
/// Groups arbitrary records by configuration, in order of first appearance.
std::vector<Summary> summarize_all(std::span<const RunRecord> records);

/// Runs seeds base_seed .. base_seed + repeats - 1. `on_record` (optional)
/// sees every record as it completes; records come back in seed order.
std::vector<RunRecord> run_many(const ExperimentConfig& config,
                                const std::function<void(const RunRecord&)>& on_record = {});

nlohmann::json to_json(const RunRecord& record);
RunRecord record_from_json(const nlohmann::json& j);
void write_record(const RunRecord& record, const std::filesystem::path& path);
RunRecord read_record(const std::filesystem::path& path);
/// Every `*.json` RunRecord in a directory (non-recursive, sorted by name).
std::vector<RunRecord> read_records(const std::filesystem::path& dir);
std::string record_file_name(const RunRecord& record);

inline constexpr int kReportSchemaVersion = 1;

/// Relative-deviation histogram edges used for the population-size report.
inline constexpr double kHistogramBinWidth = 0.05;
inline constexpr int kHistogramHalfBins = 10;  // bins cover [-0.5, 0.5); outliers go to the end bins

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t count = 0;
};

/// Histogram of (alive / target - 1) over every logged generation.
std::vector<HistogramBin> population_histogram(std::span<const RunRecord> records);

/// Writes the CSV reports and `manifest.json` into `output_dir`; returns the
/// paths written. I/O failures throw std::runtime_error naming the path.
std::vector<std::filesystem::path> emit_reports(std::span<const Summary> summaries,
                                                std::span<const RunRecord> records,
                                                const std::filesystem::path& output_dir);

}  // namespace rpnlgp
