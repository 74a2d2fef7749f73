#pragma once

// Scenario files: sectioned key = value text with unit suffixes.
//
//   # comment
//   [physical]
//   kappa   = 30 MHz
//   gamma_m = 20 kHz
//   ...
//
// Frequencies accept Hz, kHz, MHz, GHz (ordinary frequency, converted with
// 2pi), rad/s and rad/us; times accept s, ms, us, ns, ps; phases rad or deg.
// Unknown sections and keys are rejected. docs/scenario-format.md has the
// full key table.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "analysis.hpp"
#include "error.hpp"
#include "model.hpp"
#include "schedule.hpp"
#include "units.hpp"

namespace omramsey {

struct RunOptions {
  double sample_dt = kDefaultSampleDt;
  unsigned workers = 1;
  std::uint64_t seed = 1;
  std::string out = "out";

  bool operator==(const RunOptions&) const = default;
};

struct ScanSpec {
  ScanAxis axis = ScanAxis::tau2;
  std::vector<double> values;  ///< us for tau2/gap, rad/us for gamma_m

  bool operator==(const ScanSpec&) const = default;
};

struct FitSpec {
  std::vector<FreeParam> free;
  std::size_t max_iterations = 2000;
  double x_tol = SimplexOptions{}.x_tol;

  bool operator==(const FitSpec&) const = default;
};

struct Scenario {
  PhysicalParams physical = PhysicalParams::microsphere();
  PulseSchedule schedule;
  DetuningGrid grid;
  RunOptions run;
  std::optional<ScanSpec> scan;
  std::optional<FitSpec> fit;

  bool operator==(const Scenario&) const = default;
};

struct ScenarioIssue {
  std::string path;  ///< section.key
  int line = 0;      ///< 1-based; 0 when the key is absent
  std::string message;
};

class ScenarioError : public ValidationError {
 public:
  explicit ScenarioError(std::vector<ScenarioIssue> issues)
      : ValidationError(render(issues)), issues_(std::move(issues)) {}

  const std::vector<ScenarioIssue>& issues() const noexcept { return issues_; }

 private:
  static std::vector<std::string> render(const std::vector<ScenarioIssue>& issues) {
    std::vector<std::string> out;
    for (const auto& i : issues) {
      std::string s = i.path;
      if (i.line > 0) s += " (line " + std::to_string(i.line) + ")";
      out.push_back(s + ": " + i.message);
    }
    return out;
  }

  std::vector<ScenarioIssue> issues_;
};

inline const char* to_string(ScanAxis a) {
  switch (a) {
    case ScanAxis::tau2: return "tau2";
    case ScanAxis::gap: return "gap";
    case ScanAxis::gamma_m: return "gamma_m";
  }
  return "?";
}

inline const char* to_string(FreeParam f) {
  switch (f) {
    case FreeParam::big_g: return "big_g";
    case FreeParam::kappa: return "kappa";
    case FreeParam::gamma_m: return "gamma_m";
    case FreeParam::delta_offset: return "delta_offset";
  }
  return "?";
}

namespace scenario_detail {

enum class Kind { frequency, time, phase, real, integer, word, time_list, frequency_list, word_list };

struct KeySpec {
  const char* name;
  Kind kind;
  bool required;
};

struct SectionSpec {
  const char* name;
  std::vector<KeySpec> keys;
};

inline const std::vector<SectionSpec>& schema() {
  static const std::vector<SectionSpec> s = {
      {"physical",
       {{"kappa", Kind::frequency, true},
        {"kappa_e", Kind::frequency, false},
        {"gamma_m", Kind::frequency, true},
        {"omega_m", Kind::frequency, true},
        {"delta", Kind::frequency, false},
        {"big_g", Kind::frequency, true}}},
      {"schedule",
       {{"tau1", Kind::time, true},
        {"gap", Kind::time, true},
        {"tau2", Kind::time, true},
        {"gate_len", Kind::time, false},
        {"gate", Kind::word, false},
        {"gate_delay", Kind::time, false},
        {"probe_amp", Kind::real, false},
        {"pulse2_amp", Kind::real, false},
        {"pulse2_phase", Kind::phase, false},
        {"tau2_physical", Kind::time, false}}},
      {"grid", {{"center", Kind::frequency, false}, {"span", Kind::frequency, false}, {"points", Kind::integer, false}}},
      {"run",
       {{"sample_dt", Kind::time, false},
        {"workers", Kind::integer, false},
        {"seed", Kind::integer, false},
        {"out", Kind::word, false}}},
      {"scan", {{"axis", Kind::word, true}, {"values", Kind::word_list, true}}},
      {"fit", {{"free", Kind::word_list, true}, {"max_iterations", Kind::integer, false}, {"x_tol", Kind::real, false}}},
  };
  return s;
}

struct Entry {
  std::string value;
  int line = 0;
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

/// Splits "30 MHz" / "30MHz" / "-1.5e3 kHz" into number and unit.
inline bool split_quantity(std::string_view text, double& number, std::string& unit) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), number);
  if (ec != std::errc() || !std::isfinite(number)) return false;
  unit = std::string(trim(std::string_view(ptr, text.data() + text.size() - ptr)));
  return true;
}

inline std::optional<double> frequency_scale(const std::string& unit) {
  if (unit == "Hz") return units::hz_to_rad_per_us(1.0);
  if (unit == "kHz") return units::khz_to_rad_per_us(1.0);
  if (unit == "MHz") return units::mhz_to_rad_per_us(1.0);
  if (unit == "GHz") return units::hz_to_rad_per_us(1e9);
  if (unit == "rad/us") return 1.0;
  if (unit == "rad/s") return 1e-6;
  return std::nullopt;
}

inline std::optional<double> time_scale(const std::string& unit) {
  if (unit == "s") return 1e6;
  if (unit == "ms") return 1e3;
  if (unit == "us") return 1.0;
  if (unit == "ns") return 1e-3;
  if (unit == "ps") return 1e-6;
  return std::nullopt;
}

inline std::optional<double> phase_scale(const std::string& unit) {
  if (unit.empty() || unit == "rad") return 1.0;
  if (unit == "deg") return std::numbers::pi / 180.0;
  return std::nullopt;
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  while (true) {
    const auto comma = s.find(',');
    out.emplace_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Reader {
 public:
  std::map<std::string, Entry> entries;  // "section.key"
  std::map<std::string, int> sections;   // section -> header line
  std::vector<ScenarioIssue> issues;

  void fail(const std::string& path, int line, std::string msg) { issues.push_back({path, line, std::move(msg)}); }

  bool has(const std::string& path) const { return entries.count(path) > 0; }
  int line_of(const std::string& path) const {
    auto it = entries.find(path);
    return it == entries.end() ? 0 : it->second.line;
  }

  std::optional<double> quantity(const std::string& path, Kind kind) {
    auto it = entries.find(path);
    if (it == entries.end()) return std::nullopt;
    return convert(path, it->second.line, it->second.value, kind);
  }

  std::optional<double> convert(const std::string& path, int line, std::string_view text, Kind kind) {
    double number = 0.0;
    std::string unit;
    if (!split_quantity(text, number, unit)) {
      fail(path, line, "expected a number, got '" + std::string(text) + "'");
      return std::nullopt;
    }
    std::optional<double> scale;
    const char* expected = "";
    switch (kind) {
      case Kind::frequency:
      case Kind::frequency_list:
        scale = frequency_scale(unit);
        expected = "a frequency unit (Hz, kHz, MHz, GHz, rad/s, rad/us)";
        break;
      case Kind::time:
      case Kind::time_list:
        scale = time_scale(unit);
        expected = "a time unit (s, ms, us, ns, ps)";
        break;
      case Kind::phase:
        scale = phase_scale(unit);
        expected = "a phase unit (rad, deg)";
        break;
      case Kind::real:
        if (unit.empty()) scale = 1.0;
        expected = "a plain number without unit";
        break;
      case Kind::integer:
        if (unit.empty() && number == std::floor(number) && number >= 0.0) scale = 1.0;
        expected = "a non-negative integer";
        break;
      default: break;
    }
    if (!scale) {
      fail(path, line, unit.empty() ? std::string("unit mismatch: missing unit, expected ") + expected
                                    : "unit mismatch: '" + unit + "', expected " + expected);
      return std::nullopt;
    }
    return number * *scale;
  }

  std::optional<std::string> word(const std::string& path) {
    auto it = entries.find(path);
    if (it == entries.end()) return std::nullopt;
    return it->second.value;
  }
};

inline void read_lines(std::string_view text, Reader& r) {
  std::string section;
  int line_no = 0;
  while (true) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) {
      if (line.front() == '[') {
        if (line.back() != ']') {
          r.fail("<document>", line_no, "malformed section header");
        } else {
          section = std::string(trim(line.substr(1, line.size() - 2)));
          bool known = false;
          for (const auto& s : schema()) known = known || section == s.name;
          if (!known) {
            r.fail(section, line_no, "unknown section");
          } else if (r.sections.count(section)) {
            r.fail(section, line_no, "duplicate section");
          } else {
            r.sections[section] = line_no;
          }
        }
      } else if (const auto eq = line.find('='); eq == std::string_view::npos) {
        r.fail(section.empty() ? "<document>" : section, line_no, "expected 'key = value'");
      } else {
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        const std::string path = (section.empty() ? std::string("<document>") : section) + "." + key;
        const SectionSpec* spec = nullptr;
        for (const auto& s : schema())
          if (section == s.name) spec = &s;
        bool known = false;
        if (spec)
          for (const auto& k : spec->keys) known = known || key == k.name;
        if (section.empty()) {
          r.fail(path, line_no, "key outside of any section");
        } else if (!spec) {
          // already reported as unknown section
        } else if (!known) {
          r.fail(path, line_no, "unknown key");
        } else if (value.empty()) {
          r.fail(path, line_no, "empty value");
        } else if (r.entries.count(path)) {
          r.fail(path, line_no, "duplicate key");
        } else {
          r.entries[path] = {value, line_no};
        }
      }
    }
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
}

}  // namespace scenario_detail

/// Parses and validates a scenario. All problems are collected and thrown
/// together as a ScenarioError.
inline Scenario parse_scenario(std::string_view text) {
  using namespace scenario_detail;
  Reader r;
  read_lines(text, r);

  // Required keys. scan/fit keys are required only when their section is present.
  for (const auto& sec : schema()) {
    const bool optional_section = std::string_view(sec.name) == "scan" || std::string_view(sec.name) == "fit";
    if (optional_section && !r.sections.count(sec.name)) continue;
    for (const auto& k : sec.keys) {
      const std::string path = std::string(sec.name) + "." + k.name;
      if (k.required && !r.has(path)) r.fail(path, 0, "missing required key");
    }
  }

  Scenario sc;
  auto positive = [&](const std::string& path, std::optional<double> v, bool allow_zero = false) {
    if (v && (allow_zero ? *v < 0.0 : *v <= 0.0)) {
      r.fail(path, r.line_of(path), allow_zero ? "invariant violation: must be >= 0" : "invariant violation: must be > 0");
      return false;
    }
    return v.has_value();
  };

  // [physical]
  const auto kappa = r.quantity("physical.kappa", Kind::frequency);
  const auto kappa_e = r.quantity("physical.kappa_e", Kind::frequency);
  const auto gamma_m = r.quantity("physical.gamma_m", Kind::frequency);
  const auto omega_m = r.quantity("physical.omega_m", Kind::frequency);
  const auto delta = r.quantity("physical.delta", Kind::frequency);
  const auto big_g = r.quantity("physical.big_g", Kind::frequency);
  bool phys_ok = positive("physical.kappa", kappa);
  phys_ok = positive("physical.gamma_m", gamma_m) && phys_ok;
  phys_ok = positive("physical.omega_m", omega_m) && phys_ok;
  phys_ok = positive("physical.big_g", big_g, true) && phys_ok;
  if (kappa_e && kappa && (*kappa_e < 0.0 || *kappa_e > *kappa)) {
    r.fail("physical.kappa_e", r.line_of("physical.kappa_e"), "invariant violation: must lie in [0, kappa]");
    phys_ok = false;
  }
  if (r.has("physical.kappa_e") && !kappa_e) phys_ok = false;
  if (r.has("physical.delta") && !delta) phys_ok = false;
  if (phys_ok) {
    try {
      const double ke = kappa_e.value_or(*kappa / 2.0);
      const double ki = kappa_e ? *kappa - ke : *kappa / 2.0;
      sc.physical = PhysicalParams::from_channels(ke, ki, *gamma_m, *omega_m, *big_g, delta);
    } catch (const ValidationError& e) {
      for (const auto& c : e.clauses()) r.fail("physical", r.sections.count("physical") ? r.sections["physical"] : 0, c);
    }
  }

  // [schedule]
  const auto tau1 = r.quantity("schedule.tau1", Kind::time);
  const auto gap = r.quantity("schedule.gap", Kind::time);
  const auto tau2 = r.quantity("schedule.tau2", Kind::time);
  const auto gate_len = r.quantity("schedule.gate_len", Kind::time);
  const auto gate_delay = r.quantity("schedule.gate_delay", Kind::time);
  const auto probe_amp = r.quantity("schedule.probe_amp", Kind::real);
  const auto pulse2_amp = r.quantity("schedule.pulse2_amp", Kind::real);
  const auto pulse2_phase = r.quantity("schedule.pulse2_phase", Kind::phase);
  const auto tau2_physical = r.quantity("schedule.tau2_physical", Kind::time);
  const std::string gate_mode = r.word("schedule.gate").value_or("second_pair");
  bool sched_ok = positive("schedule.tau1", tau1);
  sched_ok = positive("schedule.gap", gap, true) && sched_ok;
  sched_ok = positive("schedule.tau2", tau2) && sched_ok;
  sched_ok = positive("schedule.gate_len", gate_len) && sched_ok;
  if (r.has("schedule.gate_len") && !gate_len) sched_ok = false;
  const std::pair<const char*, bool> optional_parsed[] = {
      {"schedule.gate_delay", gate_delay.has_value()},   {"schedule.probe_amp", probe_amp.has_value()},
      {"schedule.pulse2_amp", pulse2_amp.has_value()},   {"schedule.pulse2_phase", pulse2_phase.has_value()},
      {"schedule.tau2_physical", tau2_physical.has_value()}};
  for (const auto& [key, parsed] : optional_parsed) {
    if (r.has(key) && !parsed) sched_ok = false;
  }
  if (gate_mode != "second_pair" && gate_mode != "first_pulse") {
    r.fail("schedule.gate", r.line_of("schedule.gate"), "expected 'second_pair' or 'first_pulse'");
    sched_ok = false;
  }
  if (gate_mode == "first_pulse" && !r.has("schedule.gate_delay")) {
    r.fail("schedule.gate_delay", 0, "missing required key (gate = first_pulse)");
    sched_ok = false;
  }
  if (gate_mode == "second_pair" && r.has("schedule.gate_delay")) {
    r.fail("schedule.gate_delay", r.line_of("schedule.gate_delay"), "only valid with gate = first_pulse");
    sched_ok = false;
  }
  if (sched_ok) {
    try {
      auto s = PulseSchedule::second_pair(*tau1, *gap, *tau2, gate_len.value_or(1.0), probe_amp.value_or(1.0),
                                          pulse2_phase.value_or(0.0));
      if (pulse2_amp) s.pulse2_amp = *pulse2_amp;
      if (tau2_physical) s.tau2_physical = *tau2_physical;
      s.validate();
      if (gate_mode == "first_pulse") s = first_pulse_gate(s, *gate_delay);
      sc.schedule = s;
    } catch (const ValidationError& e) {
      for (const auto& c : e.clauses()) r.fail("schedule", r.sections.count("schedule") ? r.sections["schedule"] : 0, c);
    }
  }

  // [grid]
  if (auto v = r.quantity("grid.center", Kind::frequency)) sc.grid.center = *v;
  if (auto v = r.quantity("grid.span", Kind::frequency); positive("grid.span", v)) sc.grid.span = *v;
  if (auto v = r.quantity("grid.points", Kind::integer)) {
    if (*v < 2) {
      r.fail("grid.points", r.line_of("grid.points"), "invariant violation: must be >= 2");
    } else {
      sc.grid.points = static_cast<std::size_t>(*v);
    }
  }

  // [run]
  if (auto v = r.quantity("run.sample_dt", Kind::time); positive("run.sample_dt", v)) sc.run.sample_dt = *v;
  if (auto v = r.quantity("run.workers", Kind::integer)) {
    if (*v < 1) {
      r.fail("run.workers", r.line_of("run.workers"), "invariant violation: must be >= 1");
    } else {
      sc.run.workers = static_cast<unsigned>(*v);
    }
  }
  if (auto v = r.quantity("run.seed", Kind::integer)) sc.run.seed = static_cast<std::uint64_t>(*v);
  if (auto v = r.word("run.out")) sc.run.out = *v;

  // [scan]
  if (r.sections.count("scan")) {
    ScanSpec scan;
    bool ok = true;
    const auto axis = r.word("scan.axis");
    Kind kind = Kind::time;
    if (axis == "tau2") {
      scan.axis = ScanAxis::tau2;
    } else if (axis == "gap") {
      scan.axis = ScanAxis::gap;
    } else if (axis == "gamma_m") {
      scan.axis = ScanAxis::gamma_m;
      kind = Kind::frequency;
    } else if (axis) {
      r.fail("scan.axis", r.line_of("scan.axis"), "expected one of tau2, gap, gamma_m");
      ok = false;
    } else {
      ok = false;
    }
    if (ok && r.has("scan.values")) {
      const int line = r.line_of("scan.values");
      for (const auto& item : split_list(*r.word("scan.values"))) {
        auto v = r.convert("scan.values", line, item, kind);
        if (!v) {
          ok = false;
        } else if (*v <= 0.0 && !(scan.axis == ScanAxis::gap && *v == 0.0)) {
          r.fail("scan.values", line, "invariant violation: scan values must be > 0");
          ok = false;
        } else {
          scan.values.push_back(*v);
        }
      }
    }
    if (ok) sc.scan = std::move(scan);
  }

  // [fit]
  if (r.sections.count("fit")) {
    FitSpec fit;
    bool ok = true;
    if (auto words = r.word("fit.free")) {
      for (const auto& w : split_list(*words)) {
        std::optional<FreeParam> f;
        for (auto c : {FreeParam::big_g, FreeParam::kappa, FreeParam::gamma_m, FreeParam::delta_offset})
          if (w == to_string(c)) f = c;
        if (!f) {
          r.fail("fit.free", r.line_of("fit.free"), "unknown free parameter '" + w + "'");
          ok = false;
        } else if (std::find(fit.free.begin(), fit.free.end(), *f) != fit.free.end()) {
          r.fail("fit.free", r.line_of("fit.free"), "duplicate free parameter '" + w + "'");
          ok = false;
        } else {
          fit.free.push_back(*f);
        }
      }
    }
    if (auto v = r.quantity("fit.max_iterations", Kind::integer)) fit.max_iterations = static_cast<std::size_t>(*v);
    if (auto v = r.quantity("fit.x_tol", Kind::real); positive("fit.x_tol", v)) fit.x_tol = *v;
    if (ok) sc.fit = std::move(fit);
  }

  if (!r.issues.empty()) throw ScenarioError(std::move(r.issues));
  return sc;
}

/// Canonical text form: rates in rad/us and times in us at 17 significant
/// digits, so parse_scenario(serialize_scenario(s)) == s.
inline std::string serialize_scenario(const Scenario& sc) {
  using scenario_detail::fmt;
  std::string out;
  auto kv = [&](const char* key, const std::string& value) { out += std::string(key) + " = " + value + "\n"; };
  const auto& p = sc.physical;
  out += "[physical]\n";
  kv("kappa", fmt(p.kappa()) + " rad/us");
  kv("kappa_e", fmt(p.kappa_e()) + " rad/us");
  kv("gamma_m", fmt(p.gamma_m()) + " rad/us");
  kv("omega_m", fmt(p.omega_m()) + " rad/us");
  kv("delta", fmt(p.delta()) + " rad/us");
  kv("big_g", fmt(p.big_g()) + " rad/us");

  const auto& s = sc.schedule;
  out += "\n[schedule]\n";
  kv("tau1", fmt(s.tau1) + " us");
  kv("gap", fmt(s.gap) + " us");
  kv("tau2", fmt(s.tau2) + " us");
  kv("gate_len", fmt(s.gate_len) + " us");
  if (s.gate_mode == GateMode::first_pulse) {
    kv("gate", "first_pulse");
    kv("gate_delay", fmt(s.gate_start) + " us");
  } else {
    kv("gate", "second_pair");
  }
  kv("probe_amp", fmt(s.probe_amp.real()));
  if (s.pulse2_amp) kv("pulse2_amp", fmt(s.pulse2_amp->real()));
  kv("pulse2_phase", fmt(s.pulse2_phase) + " rad");
  if (s.tau2_physical) kv("tau2_physical", fmt(*s.tau2_physical) + " us");

  out += "\n[grid]\n";
  kv("center", fmt(sc.grid.center) + " rad/us");
  kv("span", fmt(sc.grid.span) + " rad/us");
  kv("points", std::to_string(sc.grid.points));

  out += "\n[run]\n";
  kv("sample_dt", fmt(sc.run.sample_dt) + " us");
  kv("workers", std::to_string(sc.run.workers));
  kv("seed", std::to_string(sc.run.seed));
  kv("out", sc.run.out);

  if (sc.scan) {
    out += "\n[scan]\n";
    kv("axis", to_string(sc.scan->axis));
    const char* unit = sc.scan->axis == ScanAxis::gamma_m ? " rad/us" : " us";
    std::string list;
    for (std::size_t i = 0; i < sc.scan->values.size(); ++i) list += (i ? ", " : "") + fmt(sc.scan->values[i]) + unit;
    kv("values", list);
  }
  if (sc.fit) {
    out += "\n[fit]\n";
    std::string list;
    for (std::size_t i = 0; i < sc.fit->free.size(); ++i) list += (i ? ", " : "") + std::string(to_string(sc.fit->free[i]));
    kv("free", list);
    kv("max_iterations", std::to_string(sc.fit->max_iterations));
    kv("x_tol", fmt(sc.fit->x_tol));
  }
  return out;
}

}  // namespace omramsey
