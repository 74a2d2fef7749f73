#pragma once

// The trace / sweep / scan / fit commands. Each command first builds all of
// its artifacts in memory; a single writer then puts them on disk and
// removes whatever it wrote if any write fails.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "io.hpp"
#include "scenario.hpp"
#include "svg.hpp"
#include "units.hpp"

namespace omramsey {

inline constexpr const char* kToolName = "omramsey";
inline constexpr const char* kToolVersion = "0.1.0";

enum class Command { trace, sweep, scan, fit };

inline std::optional<Command> parse_command(std::string_view s) {
  if (s == "trace") return Command::trace;
  if (s == "sweep") return Command::sweep;
  if (s == "scan") return Command::scan;
  if (s == "fit") return Command::fit;
  return std::nullopt;
}

inline const char* to_string(Command c) {
  switch (c) {
    case Command::trace: return "trace";
    case Command::sweep: return "sweep";
    case Command::scan: return "scan";
    case Command::fit: return "fit";
  }
  return "?";
}

struct CommandOptions {
  std::optional<std::filesystem::path> out;
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> observed;
};

struct Artifact {
  std::filesystem::path path;  ///< relative to the output directory
  std::string content;
};

struct CommandResult {
  std::vector<Artifact> artifacts;
  nlohmann::ordered_json summary;  ///< short report for the terminal
};

/// Invalid user input (exit status 1). Other exceptions map to status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace command_detail {

using json = io::json;

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline std::string scan_value_label(ScanAxis axis, double v) {
  char buf[64];
  if (axis == ScanAxis::gamma_m) {
    std::snprintf(buf, sizeof buf, "%.6gkHz", units::rad_per_us_to_hz(v) / 1e3);
  } else {
    std::snprintf(buf, sizeof buf, "%.6gus", v);
  }
  return buf;
}

inline svg::Series spectrum_series(const Spectrum& s, std::string label) {
  svg::Series out{std::move(label), {}, {}};
  for (auto it = s.points.rbegin(); it != s.points.rend(); ++it) {
    out.x.push_back(units::rad_per_us_to_hz(s.y_of(it->delta_pl)) / 1e3);
    out.y.push_back(it->intensity);
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw UsageError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace command_detail

/// Deterministic part of a run: identical scenario and seed give identical artifacts.
inline CommandResult build_artifacts(Command cmd, const Scenario& sc, const CommandOptions& opt = {}) {
  using namespace command_detail;
  const unsigned workers = opt.workers.value_or(sc.run.workers);
  const std::uint64_t seed = opt.seed.value_or(sc.run.seed);
  const SweepOptions sweep_opt{sc.run.sample_dt, workers};
  CommandResult res;
  json report;

  switch (cmd) {
    case Command::trace: {
      const double delta_pl = delta_for_y(sc.physical, sc.grid.center);
      const auto det = detunings(sc.physical, delta_pl);
      const auto trace = run_schedule(sc.schedule, det, sc.physical, sc.run.sample_dt);
      const double gated = gated_intensity(trace, sc.schedule, sc.physical);
      res.artifacts.push_back({"trace.csv", io::trace_csv(trace)});
      report = json{{"schema", "omramsey.trace_report"},
                    {"schema_version", io::kSchemaVersion},
                    {"y_hz", units::rad_per_us_to_hz(det.y)},
                    {"x_hz", units::rad_per_us_to_hz(det.x)},
                    {"samples", trace.samples.size()},
                    {"gated_intensity", gated}};
      svg::Series s{"|kappa_e alpha|^2/|E_p|^2", {}, {}};
      const double ref = std::norm(sc.schedule.probe_amp);
      for (const auto& smp : trace.samples) {
        s.x.push_back(smp.t);
        const double p = std::norm(sc.physical.kappa_e() * smp.alpha);
        s.y.push_back(ref > 0.0 ? p / ref : p);
      }
      res.artifacts.push_back({"plot.svg", svg::line_plot("Intracavity probe sideband", "t (us)",
                                                          "normalized intensity", std::span(&s, 1))});
      break;
    }
    case Command::sweep: {
      const auto spec = sweep(sc.physical, sc.schedule, sc.grid, sweep_opt);
      const auto rep = extract(spec);
      res.artifacts.push_back({"spectrum.csv", io::spectrum_csv(spec)});
      report = io::fringe_report_json(rep, spec);
      const auto s = spectrum_series(spec, "gated intensity");
      res.artifacts.push_back({"plot.svg", svg::line_plot("Gated heterodyne spectrum", "y/2pi (kHz)",
                                                          "normalized intensity", std::span(&s, 1))});
      break;
    }
    case Command::scan: {
      if (!sc.scan) throw UsageError("scan command needs a [scan] section in the scenario");
      const auto entries = scan(sc.physical, sc.schedule, sc.scan->axis, sc.scan->values, sc.grid, sweep_opt);
      report = json{{"schema", "omramsey.scan_report"},
                    {"schema_version", io::kSchemaVersion},
                    {"axis", to_string(sc.scan->axis)},
                    {"unit", sc.scan->axis == ScanAxis::gamma_m ? "Hz" : "us"},
                    {"entries", json::array()}};
      std::vector<svg::Series> series;
      for (const auto& e : entries) {
        const auto label = scan_value_label(sc.scan->axis, e.value);
        res.artifacts.push_back({std::filesystem::path("scan") / label / "spectrum.csv", io::spectrum_csv(e.spectrum)});
        const double shown = sc.scan->axis == ScanAxis::gamma_m ? units::rad_per_us_to_hz(e.value) : e.value;
        report["entries"].push_back(json{{"value", shown}, {"label", label},
                                         {"report", io::fringe_report_json(e.report, e.spectrum)}});
        series.push_back(spectrum_series(e.spectrum, label));
      }
      res.artifacts.push_back({"plot.svg", svg::line_plot(std::string("Spectra along ") + to_string(sc.scan->axis),
                                                          "y/2pi (kHz)", "normalized intensity", series)});
      break;
    }
    case Command::fit: {
      if (!opt.observed) throw UsageError("fit command needs --observed <csv>");
      if (!sc.fit) throw UsageError("fit command needs a [fit] section listing the free parameters");
      const auto observed = io::read_spectrum_csv(read_file(*opt.observed), sc.physical, sc.schedule);
      FitOptions fo;
      fo.sweep = sweep_opt;
      fo.simplex.seed = seed;
      fo.simplex.max_iterations = sc.fit->max_iterations;
      fo.simplex.x_tol = sc.fit->x_tol;
      const auto result = fit(observed, sc.physical, sc.fit->free, fo);
      std::vector<double> deltas;
      for (const auto& p : observed.points) deltas.push_back(p.delta_pl);
      const auto model = sweep_at(result.params_hat, sc.schedule, deltas, sweep_opt);
      res.artifacts.push_back({"spectrum.csv", io::spectrum_csv(model)});
      report = io::fit_result_json(result);
      report["free"] = json::array();
      for (auto f : sc.fit->free) report["free"].push_back(to_string(f));
      const svg::Series s[] = {spectrum_series(observed, "observed"), spectrum_series(model, "fitted")};
      res.artifacts.push_back({"plot.svg", svg::line_plot("Spectrum fit", "y/2pi (kHz)", "normalized intensity", s)});
      break;
    }
  }

  res.artifacts.push_back({"report.json", dump(report)});
  res.summary = report;
  return res;
}

/// Manifest with everything deterministic at top level and the run-dependent
/// values (wall time, start time, worker count) isolated under "runtime".
inline std::string manifest_json(Command cmd, const Scenario& sc, std::uint64_t seed, const std::vector<Artifact>& artifacts,
                                 double wall_time_s, unsigned workers, const std::string& started_utc) {
  using json = io::json;
  json files = json::array();
  for (const auto& a : artifacts) files.push_back(a.path.generic_string());
  files.push_back("manifest.json");
  json j{{"schema", "omramsey.manifest"},
         {"schema_version", io::kSchemaVersion},
         {"tool", kToolName},
         {"tool_version", kToolVersion},
         {"command", to_string(cmd)},
         {"seed", seed},
         {"physical", io::params_json(sc.physical)},
         {"schedule", io::schedule_json(sc.schedule)},
         {"grid",
          {{"center_hz", units::rad_per_us_to_hz(sc.grid.center)},
           {"span_hz", units::rad_per_us_to_hz(sc.grid.span)},
           {"points", sc.grid.points}}},
         {"sample_dt_us", sc.run.sample_dt},
         {"scenario_canonical", serialize_scenario(sc)},
         {"files", files},
         {"runtime", {{"wall_time_s", wall_time_s}, {"started_utc", started_utc}, {"workers", workers}}}};
  return j.dump(2) + "\n";
}

/// Writes artifacts under `dir`. On failure everything written so far is removed.
inline void write_artifacts(const std::filesystem::path& dir, const std::vector<Artifact>& artifacts) {
  namespace fs = std::filesystem;
  std::vector<fs::path> written;
  try {
    for (const auto& a : artifacts) {
      const auto target = dir / a.path;
      fs::create_directories(target.parent_path());
      std::ofstream out(target, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot open " + target.string() + " for writing");
      written.push_back(target);
      out << a.content;
      out.close();
      if (!out) throw std::runtime_error("failed writing " + target.string());
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    throw;
  }
}

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Parses the scenario, runs the command and writes its outputs.
/// Returns 0 on success, 1 on validation errors, 2 on runtime failures.
inline int run_command(Command cmd, const std::filesystem::path& scenario_path, const CommandOptions& opt,
                       std::ostream& log = std::cerr) {
  Scenario sc;
  try {
    sc = parse_scenario(command_detail::read_file(scenario_path));
  } catch (const ScenarioError& e) {
    log << "error: " << scenario_path.string() << ": " << e.what() << "\n";
    return 1;
  } catch (const UsageError& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
  const auto started = std::chrono::steady_clock::now();
  const std::string started_utc = utc_now();
  const auto dir = opt.out.value_or(std::filesystem::path(sc.run.out));
  try {
    auto res = build_artifacts(cmd, sc, opt);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    auto artifacts = std::move(res.artifacts);
    artifacts.push_back({"manifest.json", manifest_json(cmd, sc, opt.seed.value_or(sc.run.seed), artifacts, wall,
                                                        opt.workers.value_or(sc.run.workers), started_utc)});
    write_artifacts(dir, artifacts);
    log << res.summary.dump(2) << "\n";
    return 0;
  } catch (const UsageError& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    log << "runtime failure: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace omramsey
