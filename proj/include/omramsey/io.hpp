#pragma once

// CSV and JSON forms of traces, spectra, fringe reports and fit results.
// Numbers are written with 17 significant digits so that identical inputs
// give byte-identical files.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "error.hpp"
#include "propagator.hpp"
#include "units.hpp"

namespace omramsey::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline std::string trace_csv(const Trace& trace) {
  std::string out = "t_us,re_alpha,im_alpha,re_beta,im_beta\n";
  for (const auto& s : trace.samples) {
    out += fmt17(s.t) + ',' + fmt17(s.alpha.real()) + ',' + fmt17(s.alpha.imag()) + ',' + fmt17(s.beta.real()) +
           ',' + fmt17(s.beta.imag()) + '\n';
  }
  return out;
}

/// Rows ascending in detuning_hz = y / 2pi.
inline std::string spectrum_csv(const Spectrum& spectrum) {
  std::string out = "detuning_hz,intensity\n";
  for (auto it = spectrum.points.rbegin(); it != spectrum.points.rend(); ++it) {
    out += fmt17(units::rad_per_us_to_hz(spectrum.y_of(it->delta_pl))) + ',' + fmt17(it->intensity) + '\n';
  }
  return out;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

/// Reads a detuning_hz,intensity CSV into a spectrum evaluated against
/// `params` (for the y -> delta_pl mapping) and `schedule`.
inline Spectrum read_spectrum_csv(std::string_view text, const PhysicalParams& params, const PulseSchedule& schedule) {
  Spectrum out;
  out.params = params;
  out.schedule = schedule;
  std::vector<std::string> errors;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = detail::trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (line != "detuning_hz,intensity") {
        errors.push_back("line " + std::to_string(line_no) + ": expected header 'detuning_hz,intensity'");
        break;
      }
      continue;
    }
    const auto comma = line.find(',');
    double y_hz = 0.0;
    double intensity = 0.0;
    if (comma == std::string_view::npos || !detail::parse_double(line.substr(0, comma), y_hz) ||
        !detail::parse_double(line.substr(comma + 1), intensity)) {
      errors.push_back("line " + std::to_string(line_no) + ": expected two finite numbers");
      continue;
    }
    out.points.push_back({delta_for_y(params, units::hz_to_rad_per_us(y_hz)), intensity});
  }
  if (!header_seen && errors.empty()) errors.emplace_back("empty spectrum file");
  if (!errors.empty()) throw ValidationError(std::move(errors));
  std::sort(out.points.begin(), out.points.end(), [](const auto& a, const auto& b) { return a.delta_pl < b.delta_pl; });
  std::vector<double> deltas;
  for (const auto& p : out.points) deltas.push_back(p.delta_pl);
  require_grid(deltas);
  return out;
}

inline json params_json(const PhysicalParams& p) {
  using units::rad_per_us_to_hz;
  return json{{"kappa_hz", rad_per_us_to_hz(p.kappa())},     {"kappa_e_hz", rad_per_us_to_hz(p.kappa_e())},
              {"kappa_i_hz", rad_per_us_to_hz(p.kappa_i())}, {"gamma_m_hz", rad_per_us_to_hz(p.gamma_m())},
              {"omega_m_hz", rad_per_us_to_hz(p.omega_m())}, {"delta_hz", rad_per_us_to_hz(p.delta())},
              {"big_g_hz", rad_per_us_to_hz(p.big_g())},     {"ramsey_valid", p.ramsey_valid()}};
}

inline json schedule_json(const PulseSchedule& s) {
  json j{{"tau1_us", s.tau1},
         {"gap_us", s.gap},
         {"tau2_us", s.tau2},
         {"gate_start_us", s.gate_start},
         {"gate_len_us", s.gate_len},
         {"gate_mode", s.gate_mode == GateMode::second_pair ? "second_pair" : "first_pulse"},
         {"probe_amp", {s.probe_amp.real(), s.probe_amp.imag()}},
         {"pulse2_phase_rad", s.pulse2_phase}};
  if (s.pulse2_amp) j["pulse2_amp"] = {s.pulse2_amp->real(), s.pulse2_amp->imag()};
  if (s.tau2_physical) j["tau2_physical_us"] = *s.tau2_physical;
  return j;
}

/// Positions are reported as y / 2pi in Hz, so the central dip sits near 0.
inline json fringe_report_json(const FringeReport& r, const Spectrum& spectrum) {
  auto y_hz = [&](double delta_pl) { return units::rad_per_us_to_hz(spectrum.y_of(delta_pl)); };
  std::vector<double> minima;
  for (double m : r.minima) minima.push_back(y_hz(m));
  std::sort(minima.begin(), minima.end());
  json j{{"schema", "omramsey.fringe_report"},
         {"schema_version", kSchemaVersion},
         {"detuning_convention", "y/2pi = (omega_m - (omega_p - omega_l))/2pi"},
         {"central_dip_hz", y_hz(r.central_dip)},
         {"minima_hz", minima},
         {"period_hz", nullptr},
         {"visibility", r.visibility},
         {"band_hz", units::rad_per_us_to_hz(r.band)},
         {"has_fringes", r.has_fringes()}};
  if (r.period) j["period_hz"] = units::rad_per_us_to_hz(*r.period);
  return j;
}

inline json fit_result_json(const FitResult& r) {
  return json{{"schema", "omramsey.fit_result"},
              {"schema_version", kSchemaVersion},
              {"params_hat", params_json(r.params_hat)},
              {"residual", r.residual},
              {"iterations", r.iterations},
              {"evaluations", r.evaluations},
              {"converged", r.converged}};
}

}  // namespace omramsey::io
