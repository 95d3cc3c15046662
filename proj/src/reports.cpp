#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "rpnlgp/runner.hpp"

namespace rpnlgp {

namespace {

using nlohmann::json;

constexpr int kTraceWindow = 10;  // generations either side of a schedule step

json real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double real_from(const json& j, double missing) { return j.is_null() ? missing : j.get<double>(); }

std::string g17(double v) { return fmt::format("{:.17g}", v); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::string& header) : path_(path), out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << header << '\n';
  }
  void row(const std::string& line) { out_ << line << '\n'; }
  void close() {
    out_.close();
    if (!out_) throw std::runtime_error("write failed for " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace

json to_json(const RunRecord& r) {
  json gens = json::array();
  for (const GenerationLog& g : r.generations) {
    gens.push_back({{"generation", g.generation},
                    {"alive_count", g.alive_count},
                    {"target", g.target},
                    {"best_score", real(g.best_score)},
                    {"elapsed_s", g.elapsed_s}});
  }
  json verdict = {{"solved", r.verdict.solved}, {"max_relative_error", real(r.verdict.max_relative_error)}};
  verdict["failing_case_index"] = r.verdict.failing_case_index ? json(*r.verdict.failing_case_index) : json(nullptr);
  return {{"schema_version", kReportSchemaVersion},
          {"problem", r.problem},
          {"schedule", r.schedule},
          {"seed", r.seed},
          {"time_limit_s", r.time_limit_s},
          {"batch_size", r.batch_size},
          {"reuse_survivor_scores", r.reuse_survivor_scores},
          {"generations_completed", r.generations_completed()},
          {"generations", gens},
          {"total_model_evaluations", r.totals.total_model_evaluations},
          {"total_case_evaluations", r.totals.total_case_evaluations},
          {"best_genome", r.best_genome},
          {"best_score", real(r.best_score)},
          {"verdict", verdict},
          {"diagnostic", r.diagnostic},
          {"wall_time_s", r.wall_time_s}};
}

RunRecord record_from_json(const json& j) {
  const double inf = std::numeric_limits<double>::infinity();
  RunRecord r;
  r.problem = j.at("problem").get<std::string>();
  r.schedule = j.at("schedule").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.time_limit_s = j.at("time_limit_s").get<double>();
  r.batch_size = j.at("batch_size").get<int>();
  r.reuse_survivor_scores = j.value("reuse_survivor_scores", false);
  for (const json& g : j.at("generations")) {
    r.generations.push_back({g.at("generation").get<int>(), g.at("alive_count").get<std::size_t>(),
                             g.at("target").get<int>(), real_from(g.at("best_score"), -inf),
                             g.at("elapsed_s").get<double>()});
  }
  r.totals.total_model_evaluations = j.at("total_model_evaluations").get<std::uint64_t>();
  r.totals.total_case_evaluations = j.at("total_case_evaluations").get<std::uint64_t>();
  r.best_genome = j.at("best_genome").get<std::string>();
  r.best_score = real_from(j.at("best_score"), -inf);
  const json& v = j.at("verdict");
  r.verdict.solved = v.at("solved").get<bool>();
  r.verdict.max_relative_error = real_from(v.at("max_relative_error"), inf);
  if (!v.at("failing_case_index").is_null()) r.verdict.failing_case_index = v.at("failing_case_index").get<int>();
  r.diagnostic = j.value("diagnostic", std::string());
  r.wall_time_s = j.at("wall_time_s").get<double>();
  return r;
}

std::string record_file_name(const RunRecord& r) {
  std::string schedule = r.schedule;
  std::replace(schedule.begin(), schedule.end(), ':', '-');
  std::replace(schedule.begin(), schedule.end(), ',', '_');
  return fmt::format("run_{}_{}_seed{}.json", r.problem, schedule, r.seed);
}

void write_record(const RunRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(record).dump(2) << '\n';
  out.close();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

RunRecord read_record(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    return record_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::vector<RunRecord> read_records(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto& p = entry.path();
    if (entry.is_regular_file() && p.extension() == ".json" && p.filename().string().starts_with("run_")) {
      files.push_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<RunRecord> out;
  for (const auto& p : files) out.push_back(read_record(p));
  return out;
}

std::vector<HistogramBin> population_histogram(std::span<const RunRecord> records) {
  const double inf = std::numeric_limits<double>::infinity();
  const int inner = 2 * kHistogramHalfBins;
  std::vector<HistogramBin> bins(static_cast<std::size_t>(inner + 2));
  bins.front() = {-inf, -kHistogramHalfBins * kHistogramBinWidth, 0};
  for (int b = 0; b < inner; ++b) {
    bins[static_cast<std::size_t>(b + 1)] = {(b - kHistogramHalfBins) * kHistogramBinWidth,
                                             (b + 1 - kHistogramHalfBins) * kHistogramBinWidth, 0};
  }
  bins.back() = {kHistogramHalfBins * kHistogramBinWidth, inf, 0};

  for (const RunRecord& r : records) {
    for (const GenerationLog& g : r.generations) {
      if (g.target <= 0) continue;
      const double d = static_cast<double>(g.alive_count) / g.target - 1.0;
      const double slot = std::floor(d / kHistogramBinWidth) + kHistogramHalfBins;
      std::size_t index = 0;
      if (slot >= inner) {
        index = bins.size() - 1;
      } else if (slot >= 0) {
        index = static_cast<std::size_t>(slot) + 1;
      }
      ++bins[index].count;
    }
  }
  return bins;
}

std::vector<std::filesystem::path> emit_reports(std::span<const Summary> summaries, std::span<const RunRecord> records,
                                                const std::filesystem::path& output_dir) {
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + output_dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  json manifest = {{"schema_version", kReportSchemaVersion}, {"entries", json::array()}, {"files", json::array()}};

  if (!summaries.empty()) {
    // Schedules in order of first appearance.
    std::vector<std::string> schedules;
    for (const Summary& s : summaries) {
      if (std::find(schedules.begin(), schedules.end(), s.schedule) == schedules.end()) schedules.push_back(s.schedule);
    }

    {
      const auto path = output_dir / "table2.csv";
      CsvFile f(path, "config,solved");
      for (const std::string& sched : schedules) {
        int solved = 0;
        int runs = 0;
        for (const Summary& s : summaries) {
          if (s.schedule != sched) continue;
          solved += s.solved;
          runs += s.repeats;
        }
        f.row(fmt::format("{},{}/{}", csv_field(sched), solved, runs));
      }
      f.close();
      written.push_back(path);
    }
    {
      const auto path = output_dir / "solved_rates.csv";
      CsvFile f(path, "config,problem,solved,repeats,rate,wilson_lo,wilson_hi");
      for (const Summary& s : summaries) {
        f.row(fmt::format("{},{},{},{},{},{},{}", csv_field(s.schedule), s.problem, s.solved, s.repeats,
                          g17(static_cast<double>(s.solved) / s.repeats), g17(s.interval.lo), g17(s.interval.hi)));
      }
      f.close();
      written.push_back(path);
    }
    {
      const auto path = output_dir / "population_histogram.csv";
      CsvFile f(path, "config,bin_lo,bin_hi,count");
      for (const std::string& sched : schedules) {
        std::vector<RunRecord> group;
        for (const RunRecord& r : records) {
          if (r.schedule == sched) group.push_back(r);
        }
        for (const HistogramBin& b : population_histogram(group)) {
          f.row(fmt::format("{},{},{},{}", csv_field(sched), g17(b.lo), g17(b.hi), b.count));
        }
      }
      f.close();
      written.push_back(path);
    }
    {
      const auto path = output_dir / "generations.csv";
      CsvFile f(path, "config,problem,seed,generations");
      for (const RunRecord& r : records) {
        f.row(fmt::format("{},{},{},{}", csv_field(r.schedule), r.problem, r.seed, r.generations_completed()));
      }
      f.close();
      written.push_back(path);
    }
    {
      const auto path = output_dir / "evaluations.csv";
      CsvFile f(path, "config,problem,seed,model_evaluations,case_evaluations");
      for (const RunRecord& r : records) {
        f.row(fmt::format("{},{},{},{},{}", csv_field(r.schedule), r.problem, r.seed,
                          r.totals.total_model_evaluations, r.totals.total_case_evaluations));
      }
      f.close();
      written.push_back(path);
    }
    {
      const auto path = output_dir / "population_trace.csv";
      CsvFile f(path, "config,problem,seed,generation,step_generation,target,alive_count");
      for (const RunRecord& r : records) {
        const PopulationSchedule schedule = PopulationSchedule::parse(r.schedule);
        for (const ScheduleStep& step : schedule.steps()) {
          for (const GenerationLog& g : r.generations) {
            if (std::abs(g.generation - step.from_generation) > kTraceWindow) continue;
            f.row(fmt::format("{},{},{},{},{},{},{}", csv_field(r.schedule), r.problem, r.seed, g.generation,
                              step.from_generation, g.target, g.alive_count));
          }
        }
      }
      f.close();
      written.push_back(path);
    }

    for (const Summary& s : summaries) {
      manifest["entries"].push_back({{"problem", s.problem},
                                     {"config", s.schedule},
                                     {"solved", s.solved},
                                     {"repeats", s.repeats},
                                     {"wilson_lo", s.interval.lo},
                                     {"wilson_hi", s.interval.hi}});
    }
    for (const auto& p : written) manifest["files"].push_back(p.filename().string());
  }

  const auto manifest_path = output_dir / "manifest.json";
  std::ofstream out(manifest_path);
  if (!out) throw std::runtime_error("cannot write " + manifest_path.string());
  out << manifest.dump(2) << '\n';
  out.close();
  if (!out) throw std::runtime_error("write failed for " + manifest_path.string());
  written.push_back(manifest_path);
  return written;
}

}  // namespace rpnlgp
