#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include <gtest/gtest.h>

#include <omramsey/omramsey.hpp>

using namespace omramsey;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string preset(const std::string& name) { return slurp(fs::path(OMRAMSEY_SCENARIO_DIR) / (name + ".scn")); }

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  if (at == std::string::npos) throw std::runtime_error("pattern not found: " + from);
  return text.replace(at, from.size(), to);
}

/// A preset shrunk to a fast grid, in canonical form.
std::string small(const std::string& name) {
  auto sc = parse_scenario(preset(name));
  sc.grid.points = 201;
  sc.run.sample_dt = 0.01;
  return serialize_scenario(sc);
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag)
      : path_(fs::temp_directory_path() / ("omramsey_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  fs::path write(const std::string& name, const std::string& content) const {
    std::ofstream(path_ / name, std::ios::binary) << content;
    return path_ / name;
  }

 private:
  fs::path path_;
};

std::vector<ScenarioIssue> issues_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ScenarioError& e) {
    return e.issues();
  }
  return {};
}

bool has_issue(const std::vector<ScenarioIssue>& issues, const std::string& path) {
  for (const auto& i : issues)
    if (i.path == path) return true;
  return false;
}

}  // namespace

TEST(Scenario, ParsesReferencePreset) {
  const auto sc = parse_scenario(preset("fig3a"));
  EXPECT_NEAR(units::rad_per_us_to_hz(sc.physical.kappa()), 30e6, 1e-6);
  EXPECT_NEAR(units::rad_per_us_to_hz(sc.physical.gamma_m()), 20e3, 1e-9);
  EXPECT_NEAR(units::rad_per_us_to_hz(sc.physical.big_g()), 0.58e6, 1e-7);
  EXPECT_EQ(sc.physical.kappa_e(), sc.physical.kappa() / 2.0);
  EXPECT_DOUBLE_EQ(sc.schedule.tau1, 4.0);
  EXPECT_DOUBLE_EQ(sc.schedule.gap, 4.0);
  EXPECT_DOUBLE_EQ(sc.schedule.tau2, 1.0);
  EXPECT_DOUBLE_EQ(sc.schedule.gate_start, 8.0);
  EXPECT_EQ(sc.grid.points, 2001u);
  EXPECT_DOUBLE_EQ(sc.run.sample_dt, 1e-3);
  EXPECT_EQ(sc.run.out, "out/fig3a");
  EXPECT_FALSE(sc.scan);
  EXPECT_FALSE(sc.fit);
}

TEST(Scenario, EveryPresetParses) {
  for (const auto& entry : fs::directory_iterator(OMRAMSEY_SCENARIO_DIR)) {
    if (entry.path().extension() != ".scn") continue;
    EXPECT_NO_THROW(parse_scenario(slurp(entry.path()))) << entry.path();
  }
}

TEST(Scenario, CanonicalFormRoundTrips) {
  for (const char* name : {"fig3a", "fig3_first_pulse", "fig5a", "fig5d", "fig3a_fit"}) {
    const auto sc = parse_scenario(preset(name));
    const auto text = serialize_scenario(sc);
    EXPECT_EQ(parse_scenario(text), sc) << name;
    EXPECT_EQ(serialize_scenario(parse_scenario(text)), text) << name;
  }
}

TEST(Scenario, EmptyDocumentListsRequiredKeys) {
  const auto issues = issues_of("");
  for (const char* k : {"physical.kappa", "physical.gamma_m", "physical.omega_m", "physical.big_g", "schedule.tau1",
                        "schedule.gap", "schedule.tau2"}) {
    EXPECT_TRUE(has_issue(issues, k)) << k;
  }
  EXPECT_EQ(issues.size(), 7u);
}

TEST(Scenario, NegativeKappaNamesKeyAndLine) {
  const auto issues = issues_of(replace(preset("fig3a"), "kappa   = 30 MHz", "kappa   = -30 MHz"));
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].path, "physical.kappa");
  EXPECT_EQ(issues[0].line, 3);
  EXPECT_NE(issues[0].message.find("invariant"), std::string::npos);
}

TEST(Scenario, UnitMismatchIsReported) {
  const auto issues = issues_of(replace(preset("fig3a"), "gamma_m = 20 kHz", "gamma_m = 20 us"));
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].path, "physical.gamma_m");
  EXPECT_NE(issues[0].message.find("unit mismatch"), std::string::npos);
  EXPECT_TRUE(has_issue(issues_of(replace(preset("fig3a"), "tau1     = 4 us", "tau1     = 4")), "schedule.tau1"));
}

TEST(Scenario, UnknownAndDuplicateKeys) {
  const auto base = preset("fig3a");
  EXPECT_TRUE(has_issue(issues_of(base + "\n[physical]\n"), "physical"));
  EXPECT_TRUE(has_issue(issues_of(replace(base, "[grid]", "[grid]\nwidth = 3 MHz")), "grid.width"));
  EXPECT_TRUE(has_issue(issues_of(replace(base, "[grid]", "[grid]\npoints = 11")), "grid.points"));
  EXPECT_TRUE(has_issue(issues_of(base + "\n[extras]\nfoo = 1\n"), "extras"));
  EXPECT_TRUE(has_issue(issues_of("kappa = 1 MHz\n" + base), "<document>.kappa"));
}

TEST(Scenario, CollectsAllProblemsAtOnce) {
  auto text = replace(preset("fig3a"), "kappa   = 30 MHz", "kappa   = 0 MHz");
  text = replace(text, "tau2     = 1 us", "tau2     = 1 kHz");
  text = replace(text, "points = 2001", "points = 1");
  const auto issues = issues_of(text);
  EXPECT_TRUE(has_issue(issues, "physical.kappa"));
  EXPECT_TRUE(has_issue(issues, "schedule.tau2"));
  EXPECT_TRUE(has_issue(issues, "grid.points"));
}

TEST(Scenario, ScheduleInvariantsFromSchedule) {
  const auto issues = issues_of(replace(preset("fig3a"), "gate_len = 1 us", "gate_len = 20 us"));
  ASSERT_FALSE(issues.empty());
  EXPECT_EQ(issues[0].path, "schedule");
}

TEST(Scenario, FirstPulseGateNeedsDelay) {
  const auto text = replace(preset("fig3_first_pulse"), "gate_delay = 3 us", "");
  EXPECT_TRUE(has_issue(issues_of(text), "schedule.gate_delay"));
  const auto sc = parse_scenario(preset("fig3_first_pulse"));
  EXPECT_EQ(sc.schedule.gate_mode, GateMode::first_pulse);
  EXPECT_DOUBLE_EQ(sc.schedule.gate_start, 3.0);
  EXPECT_TRUE(has_issue(issues_of(replace(preset("fig3a"), "[grid]", "[schedule_x]")), "schedule_x"));
}

TEST(Scenario, ScanAndFitSections) {
  const auto sc = parse_scenario(preset("fig5d"));
  ASSERT_TRUE(sc.scan);
  EXPECT_EQ(sc.scan->axis, ScanAxis::gamma_m);
  ASSERT_EQ(sc.scan->values.size(), 4u);
  EXPECT_NEAR(units::rad_per_us_to_hz(sc.scan->values[3]), 40e3, 1e-9);
  EXPECT_TRUE(has_issue(issues_of(preset("fig3a") + "\n[scan]\naxis = kappa\nvalues = 1 us\n"), "scan.axis"));
  EXPECT_TRUE(has_issue(issues_of(preset("fig3a") + "\n[scan]\naxis = tau2\n"), "scan.values"));
  EXPECT_TRUE(has_issue(issues_of(preset("fig3a") + "\n[scan]\naxis = tau2\nvalues = 1 us, 2 MHz\n"), "scan.values"));
  EXPECT_TRUE(has_issue(issues_of(preset("fig3a") + "\n[fit]\nfree = big_g, omega\n"), "fit.free"));
  EXPECT_TRUE(has_issue(issues_of(preset("fig3a") + "\n[fit]\nfree = big_g, big_g\n"), "fit.free"));
  EXPECT_TRUE(has_issue(issues_of(preset("fig3a") + "\n[fit]\n"), "fit.free"));
}

TEST(Artifacts, SweepOutputs) {
  const auto res = build_artifacts(Command::sweep, parse_scenario(small("fig3a")));
  ASSERT_EQ(res.artifacts.size(), 3u);
  const auto& csv = res.artifacts[0];
  EXPECT_EQ(csv.path, "spectrum.csv");
  EXPECT_EQ(std::count(csv.content.begin(), csv.content.end(), '\n'), 202);
  EXPECT_EQ(csv.content.substr(0, csv.content.find('\n')), "detuning_hz,intensity");
  EXPECT_NE(res.artifacts[1].content.find("<polyline"), std::string::npos);
  const auto report = json::parse(res.artifacts[2].content);
  EXPECT_TRUE(schema::validate(report).empty());
  EXPECT_EQ(report["central_dip_hz"].get<double>(), 0.0);
  EXPECT_TRUE(report["has_fringes"].get<bool>());
}

TEST(Artifacts, SpectrumCsvRowsAscend) {
  const auto res = build_artifacts(Command::sweep, parse_scenario(small("fig3a")));
  const auto sc = parse_scenario(small("fig3a"));
  const auto back = io::read_spectrum_csv(res.artifacts[0].content, sc.physical, sc.schedule);
  ASSERT_EQ(back.points.size(), 201u);
  EXPECT_NEAR(back.y_of(back.points.front().delta_pl), units::mhz_to_rad_per_us(0.6), 1e-9);
}

TEST(Artifacts, UndrivenTraceIsAllZero) {
  auto sc = parse_scenario(small("fig3a"));
  sc.schedule.probe_amp = 0.0;
  const auto res = build_artifacts(Command::trace, sc);
  const auto& csv = res.artifacts[0].content;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t_us,re_alpha,im_alpha,re_beta,im_beta");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(line.substr(line.find(',')), ",0.0000000000000000e+00,0.0000000000000000e+00,0.0000000000000000e+00,"
                                           "0.0000000000000000e+00");
  }
  EXPECT_GT(rows, 900u);
  const auto report = json::parse(res.artifacts.back().content);
  EXPECT_TRUE(schema::validate(report).empty());
  EXPECT_EQ(report["gated_intensity"].get<double>(), 0.0);
}

TEST(Artifacts, ScanWritesOneSpectrumPerValue) {
  const auto text = small("fig5b");
  const auto res = build_artifacts(Command::scan, parse_scenario(text));
  std::vector<std::string> paths;
  for (const auto& a : res.artifacts) paths.push_back(a.path.generic_string());
  EXPECT_NE(std::find(paths.begin(), paths.end(), "scan/1us/spectrum.csv"), paths.end());
  EXPECT_NE(std::find(paths.begin(), paths.end(), "scan/15us/spectrum.csv"), paths.end());
  const auto report = json::parse(res.artifacts.back().content);
  EXPECT_TRUE(schema::validate(report).empty());
  EXPECT_EQ(report["entries"].size(), 2u);
}

TEST(Artifacts, CommandsNeedTheirSections) {
  const auto sc = parse_scenario(small("fig3a"));
  EXPECT_THROW(build_artifacts(Command::scan, sc), UsageError);
  EXPECT_THROW(build_artifacts(Command::fit, sc), UsageError);
  CommandOptions opt;
  opt.observed = "/nonexistent/observed.csv";
  EXPECT_THROW(build_artifacts(Command::fit, parse_scenario(small("fig3a_fit")), opt), UsageError);
}

TEST(Artifacts, FailedWriteRemovesPartialOutput) {
  TempDir dir("partial");
  const std::vector<Artifact> arts{{"a.txt", "x"}, {fs::path("a.txt") / "b.txt", "y"}};
  EXPECT_ANY_THROW(write_artifacts(dir.path(), arts));
  EXPECT_FALSE(fs::exists(dir.path() / "a.txt"));
}

TEST(Schema, RejectsMalformedDocuments) {
  EXPECT_FALSE(schema::validate(json::array()).empty());
  EXPECT_FALSE(schema::validate(json{{"schema", "omramsey.nothing"}}).empty());
  json rep = json::parse(build_artifacts(Command::sweep, parse_scenario(small("fig3a"))).artifacts[2].content);
  rep["visibility"] = 1.5;
  EXPECT_FALSE(schema::validate(rep).empty());
  rep.erase("period_hz");
  EXPECT_GE(schema::validate(rep).size(), 2u);
}

TEST(RunCommand, ExitCodes) {
  TempDir dir("exit");
  std::ostringstream log;
  const auto bad = dir.write("bad.scn", "[physical]\nkappa = -30 MHz\n");
  EXPECT_EQ(run_command(Command::sweep, bad, {}, log), 1);
  EXPECT_NE(log.str().find("physical.kappa"), std::string::npos);
  EXPECT_EQ(run_command(Command::sweep, dir.path() / "missing.scn", {}, log), 1);
  const auto good = dir.write("good.scn", small("fig3a"));
  EXPECT_EQ(run_command(Command::fit, good, {.out = dir.path() / "f"}, log), 1);
  EXPECT_FALSE(fs::exists(dir.path() / "f"));
  const auto blocker = dir.write("blocker", "");
  EXPECT_EQ(run_command(Command::sweep, good, {.out = blocker / "sub"}, log), 2);
  EXPECT_EQ(run_command(Command::sweep, good, {.out = dir.path() / "ok"}, log), 0);
  EXPECT_TRUE(fs::exists(dir.path() / "ok" / "manifest.json"));
}

TEST(RunCommand, ManifestConformsAndListsFiles) {
  TempDir dir("manifest");
  const auto sc = dir.write("s.scn", small("fig3a"));
  std::ostringstream log;
  ASSERT_EQ(run_command(Command::sweep, sc, {.out = dir.path() / "o", .seed = 9}, log), 0);
  const auto m = json::parse(slurp(dir.path() / "o" / "manifest.json"));
  EXPECT_TRUE(schema::validate(m).empty());
  EXPECT_EQ(m["seed"].get<int>(), 9);
  EXPECT_EQ(m["tool_version"], kToolVersion);
  for (const auto& f : m["files"]) EXPECT_TRUE(fs::exists(dir.path() / "o" / f.get<std::string>())) << f;
  EXPECT_EQ(parse_scenario(m["scenario_canonical"].get<std::string>()), parse_scenario(small("fig3a")));
}

TEST(RunCommand, DeterministicAcrossRunsAndWorkers) {
  TempDir dir("determinism");
  const auto sc = dir.write("s.scn", small("fig5b"));
  std::ostringstream log;
  ASSERT_EQ(run_command(Command::scan, sc, {.out = dir.path() / "a", .workers = 1}, log), 0);
  ASSERT_EQ(run_command(Command::scan, sc, {.out = dir.path() / "b", .workers = 3}, log), 0);
  ASSERT_EQ(run_command(Command::scan, sc, {.out = dir.path() / "c", .workers = 1}, log), 0);
  for (const char* other : {"b", "c"}) {
    for (const auto& e : fs::recursive_directory_iterator(dir.path() / "a")) {
      if (!e.is_regular_file()) continue;
      const auto rel = fs::relative(e.path(), dir.path() / "a");
      if (rel == "manifest.json") continue;
      EXPECT_EQ(slurp(e.path()), slurp(dir.path() / other / rel)) << rel;
    }
    auto ma = json::parse(slurp(dir.path() / "a" / "manifest.json"));
    auto mb = json::parse(slurp(dir.path() / other / "manifest.json"));
    ma.erase("runtime");
    mb.erase("runtime");
    EXPECT_EQ(ma.dump(), mb.dump());
  }
}

TEST(RunCommand, FitRecoversSweepInput) {
  TempDir dir("fit");
  const auto truth = dir.write("truth.scn", small("fig3a"));
  std::ostringstream log;
  ASSERT_EQ(run_command(Command::sweep, truth, {.out = dir.path() / "truth"}, log), 0);
  const auto start = dir.write("start.scn", small("fig3a_fit"));
  ASSERT_EQ(run_command(Command::fit, start,
                        {.out = dir.path() / "fit", .observed = dir.path() / "truth" / "spectrum.csv"}, log),
            0);
  const auto r = json::parse(slurp(dir.path() / "fit" / "report.json"));
  EXPECT_TRUE(schema::validate(r).empty());
  EXPECT_NEAR(r["params_hat"]["big_g_hz"].get<double>(), 0.58e6, 0.58e4);
  EXPECT_LT(r["residual"].get<double>(), 1e-8);
  EXPECT_EQ(r["free"][0], "big_g");
}

TEST(Binary, VersionAndUsageErrors) {
  const std::string exe = OMRAMSEY_CLI;
  EXPECT_EQ(std::system((exe + " --version > /dev/null").c_str()), 0);
  EXPECT_NE(std::system((exe + " frobnicate --scenario " + OMRAMSEY_SCENARIO_DIR + "/fig3a.scn 2> /dev/null").c_str()),
            0);
  EXPECT_NE(std::system((exe + " sweep 2> /dev/null").c_str()), 0);
}
