// rpnlgp: run, aggregate and check symbolic-regression experiments.
//
//   rpnlgp run --problem I.11.19 --schedule 0:10000,20:1000 --time-limit 60 --repeats 5 --out results
//   rpnlgp bench-all --schedules 100 1000 10000 --time-limit 120 --out grid
//   rpnlgp report --in results --out results
//   rpnlgp eval --genome "x0 x1 * x2 x3 * + x4 x5 * +" --problem I.11.19 --seed 7
//
// Every flag can also come from `--config file`, one `key = value` per line
// (keys are the long flag names); flags on the command line win.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rpnlgp/runner.hpp"

namespace fs = std::filesystem;
using namespace rpnlgp;

namespace {

struct Options {
  std::string problem = "I.11.19";
  std::string schedule = "1000";
  std::vector<std::string> schedules{"100", "1000", "10000", "100000"};
  std::vector<std::string> problems;
  double time_limit = 120.0;
  int repeats = 30;
  std::uint64_t seed = 1;
  int batch_size = 512;
  std::string out = "results";
  std::string in;
  int workers = 0;
  std::size_t max_chunk = 0;
  int max_generations = 0;
  int parallel_runs = 1;
  int max_length = 64;
  int microcosm = 100;
  std::string genome;
  bool quiet = false;
  bool reuse_scores = false;
};

ExperimentConfig make_config(const Options& o, const std::string& problem, const std::string& schedule) {
  ExperimentConfig c;
  c.problem = problem;
  c.schedule = PopulationSchedule::parse(schedule);
  c.time_limit_s = o.time_limit;
  c.batch_size = o.batch_size;
  c.repeats = o.repeats;
  c.base_seed = o.seed;
  c.output_dir = o.out;
  c.workers = o.workers;
  c.max_chunk = o.max_chunk;
  c.max_generations = o.max_generations;
  c.parallel_runs = o.parallel_runs;
  c.genome.max_length = o.max_length;
  c.control.microcosm_size = o.microcosm;
  c.reuse_survivor_scores = o.reuse_scores;
  c.check();
  return c;
}

void print_summary(const Summary& s) {
  fmt::print("{:<10} {:<20} solved {:>3}/{:<3} wilson [{:.3f}, {:.3f}]\n", s.problem, s.schedule, s.solved, s.repeats,
             s.interval.lo, s.interval.hi);
}

std::vector<RunRecord> run_grid(const Options& o, const std::vector<std::string>& problems,
                                const std::vector<std::string>& schedules) {
  fs::create_directories(o.out);
  std::vector<RunRecord> all;
  for (const std::string& sched : schedules) {
    for (const std::string& problem : problems) {
      const ExperimentConfig config = make_config(o, problem, sched);
      auto records = run_many(config, [&](const RunRecord& r) {
        write_record(r, fs::path(o.out) / record_file_name(r));
        if (!o.quiet) {
          fmt::print("  {} {} seed {}: {} generations, {}{}\n", r.problem, r.schedule, r.seed,
                     r.generations_completed(), r.verdict.solved ? "solved" : "unsolved",
                     r.diagnostic.empty() ? "" : " (" + r.diagnostic + ")");
          std::fflush(stdout);
        }
      });
      print_summary(summarize(records));
      all.insert(all.end(), std::make_move_iterator(records.begin()), std::make_move_iterator(records.end()));
    }
  }
  return all;
}

void write_reports(const std::vector<RunRecord>& records, const fs::path& out) {
  const std::vector<Summary> summaries = summarize_all(records);
  for (const fs::path& p : emit_reports(summaries, records, out)) fmt::print("wrote {}\n", p.string());
}

int eval_genome(const Options& o) {
  const ProblemSpec& spec = find_problem(o.problem);
  const Genome genome = parse_text(o.genome);
  if (genome.min_arity() > spec.arity()) {
    throw UsageError(fmt::format("genome reads x{} but {} has {} inputs", genome.min_arity() - 1, spec.id,
                                 spec.arity()));
  }
  const Dataset data = generate_dataset(spec, o.seed);
  FitnessConfig fitness;
  fitness.batch_size = o.batch_size;
  const DatasetBatch train = o.batch_size == kTrainCases ? data.train : data.train.head(o.batch_size);
  const Verdict v = validate_model(genome, data.test);
  nlohmann::json j = {{"problem", spec.id},
                      {"seed", o.seed},
                      {"genome", to_text(genome)},
                      {"training_score", fitness_of(genome, train, fitness)},
                      {"solved", v.solved},
                      {"max_relative_error", std::isfinite(v.max_relative_error) ? nlohmann::json(v.max_relative_error)
                                                                                 : nlohmann::json(nullptr)},
                      {"failing_case_index", v.failing_case_index ? nlohmann::json(*v.failing_case_index)
                                                                  : nlohmann::json(nullptr)}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear GP symbolic regression with microcosm population control"};
  app.set_config("--config", "", "Flat key = value file; command-line flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--problem", o.problem, "Problem id or equation number")->capture_default_str();
  app.add_option("--schedule", o.schedule, "Population schedule gen:size,...")->capture_default_str();
  app.add_option("--schedules", o.schedules, "Schedules for bench-all")->capture_default_str();
  app.add_option("--problems", o.problems, "Problems for bench-all (default: all seven)");
  app.add_option("--time-limit", o.time_limit, "Wall-clock budget per run, seconds")->capture_default_str();
  app.add_option("--repeats", o.repeats, "Independent runs per configuration")->capture_default_str();
  app.add_option("--seed", o.seed, "Base seed")->capture_default_str();
  app.add_option("--batch-size", o.batch_size, "Fitness cases per generation")->capture_default_str();
  app.add_option("--out", o.out, "Output directory")->capture_default_str();
  app.add_option("--in", o.in, "Directory of run records (report)");
  app.add_option("--workers", o.workers, "Evaluator threads per run, 0 = all cores")->capture_default_str();
  app.add_option("--max-chunk", o.max_chunk, "Largest evaluation dispatch, 0 = whole population")
      ->capture_default_str();
  app.add_option("--max-generations", o.max_generations, "Generation cap, 0 = time only")->capture_default_str();
  app.add_option("--parallel-runs", o.parallel_runs, "Runs executed concurrently")->capture_default_str();
  app.add_option("--max-length", o.max_length, "Maximum genome length")->capture_default_str();
  app.add_option("--microcosm", o.microcosm, "Microcosm sample size")->capture_default_str();
  app.add_option("--genome", o.genome, "RPN program (eval)");
  app.add_flag("--quiet", o.quiet, "Only print summaries");
  app.add_flag("--reuse-scores", o.reuse_scores, "Do not re-score unchanged survivors (evaluation totals then count only new scores)");

  auto* run = app.add_subcommand("run", "Repeated runs of one problem and schedule");
  auto* bench = app.add_subcommand("bench-all", "Every problem under every schedule");
  auto* report = app.add_subcommand("report", "Re-aggregate reports from run record files");
  auto* eval = app.add_subcommand("eval", "Validate a hand-written genome");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      write_reports(run_grid(o, {o.problem}, {o.schedule}), o.out);
    } else if (bench->parsed()) {
      std::vector<std::string> problems = o.problems;
      if (problems.empty()) {
        for (const ProblemSpec& spec : registry()) problems.push_back(spec.id);
      }
      write_reports(run_grid(o, problems, o.schedules), o.out);
    } else if (report->parsed()) {
      if (o.in.empty()) throw UsageError("report needs --in");
      const std::vector<RunRecord> records = read_records(o.in);
      for (const Summary& s : summarize_all(records)) print_summary(s);
      write_reports(records, o.out);
    } else if (eval->parsed()) {
      if (o.genome.empty()) throw UsageError("eval needs --genome");
      return eval_genome(o);
    }
  } catch (const ParseError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const UsageError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
