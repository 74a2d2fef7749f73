#pragma once

// Two-pulse Ramsey protocol and its compilation into constant-coefficient
// segments. Time origin is the onset of the first pulse pair; durations in us.

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"

namespace omramsey {

enum class GateMode {
  second_pair,  ///< gate trailing edge defines the effective tau2
  first_pulse,  ///< gate inside the first pulse pair (transient OMIT reference)
};

struct Segment {
  double duration = 0.0;
  bool g_on = false;
  std::complex<double> probe{};

  bool operator==(const Segment&) const = default;
};

struct PulseSchedule {
  double tau1 = 0.0;
  double gap = 0.0;
  double tau2 = 0.0;
  double gate_start = 0.0;
  double gate_len = 0.0;
  std::complex<double> probe_amp{1.0, 0.0};
  double pulse2_phase = 0.0;
  std::optional<std::complex<double>> pulse2_amp;  ///< overrides probe_amp for the second pulse
  std::optional<double> tau2_physical;             ///< second pulse longer than the gate end
  GateMode gate_mode = GateMode::second_pair;

  /// Second-pair schedule with the gate's trailing edge at tau1 + gap + tau2.
  static PulseSchedule second_pair(double tau1, double gap, double tau2, double gate_len = 1.0,
                                   std::complex<double> probe_amp = 1.0, double pulse2_phase = 0.0) {
    PulseSchedule s;
    s.tau1 = tau1;
    s.gap = gap;
    s.tau2 = tau2;
    s.gate_len = gate_len;
    s.gate_start = tau1 + gap + tau2 - gate_len;
    s.probe_amp = probe_amp;
    s.pulse2_phase = pulse2_phase;
    s.validate();
    return s;
  }

  /// tau1 + gap + tau2, the end of the gate in second-pair mode.
  double gate_end_reference() const { return tau1 + gap + tau2; }

  /// Simulated span [0, horizon].
  double horizon() const { return tau1 + gap + tau2_physical.value_or(tau2); }

  double gate_end() const { return gate_start + gate_len; }

  std::complex<double> second_probe() const {
    return pulse2_amp.value_or(probe_amp) * std::polar(1.0, pulse2_phase);
  }

  std::vector<std::string> violations() const {
    std::vector<std::string> bad;
    if (!(tau1 > 0.0)) bad.emplace_back("tau1 must be > 0");
    if (!(tau2 > 0.0)) bad.emplace_back("tau2 must be > 0");
    if (!(gap >= 0.0)) bad.emplace_back("gap must be >= 0");
    if (!(gate_len > 0.0)) bad.emplace_back("gate_len must be > 0");
    if (!std::isfinite(pulse2_phase)) bad.emplace_back("pulse2_phase must be finite");
    if (tau2_physical && !(*tau2_physical >= tau2)) bad.emplace_back("tau2_physical must be >= tau2");
    if (!bad.empty()) return bad;

    const double h = horizon();
    const double tol = 1e-12 * std::max(1.0, h);
    if (gate_start < -tol || gate_end() > h + tol) {
      bad.emplace_back("gate window must lie inside [0, tau1 + gap + tau2]");
    }
    if (gate_mode == GateMode::second_pair && std::abs(gate_end() - gate_end_reference()) > tol) {
      bad.emplace_back("second-pair gate must end at tau1 + gap + tau2");
    }
    if (gate_mode == GateMode::first_pulse && gate_end() > tau1 + tol) {
      bad.emplace_back("first-pulse gate must end inside the first pulse (gate_start + gate_len <= tau1)");
    }
    return bad;
  }

  void validate() const {
    if (auto bad = violations(); !bad.empty()) throw ValidationError(std::move(bad));
  }

  bool operator==(const PulseSchedule&) const = default;
};

/// Segments of the schedule: (tau1, on, E_p), (gap, off, 0), (tau2, on, E_p e^{i phi2}).
/// A zero gap with an unchanged second probe merges into one on-segment.
inline std::vector<Segment> compile(const PulseSchedule& s) {
  s.validate();
  const double tau2 = s.tau2_physical.value_or(s.tau2);
  const auto probe2 = s.second_probe();
  if (s.gap == 0.0 && probe2 == s.probe_amp) {
    return {Segment{s.tau1 + tau2, true, s.probe_amp}};
  }
  return {Segment{s.tau1, true, s.probe_amp}, Segment{s.gap, false, 0.0}, Segment{tau2, true, probe2}};
}

/// Moves the gate inside the first pulse pair, starting `t_prime` after onset.
inline PulseSchedule first_pulse_gate(const PulseSchedule& s, double t_prime) {
  if (!(t_prime >= 0.0) || t_prime + s.gate_len > s.tau1 * (1.0 + 1e-12)) {
    throw ValidationError({"first-pulse gate [t', t' + gate_len] must lie inside [0, tau1]"});
  }
  PulseSchedule out = s;
  out.gate_mode = GateMode::first_pulse;
  out.gate_start = t_prime;
  out.validate();
  return out;
}

/// Splits whichever segment straddles `t` so that `t` becomes a segment boundary.
inline std::vector<Segment> split_at(const std::vector<Segment>& segments, double t) {
  std::vector<Segment> out;
  out.reserve(segments.size() + 1);
  double start = 0.0;
  for (const auto& seg : segments) {
    const double end = start + seg.duration;
    const double tol = 1e-12 * std::max(1.0, end);
    if (t > start + tol && t < end - tol) {
      out.push_back({t - start, seg.g_on, seg.probe});
      out.push_back({end - t, seg.g_on, seg.probe});
    } else {
      out.push_back(seg);
    }
    start = end;
  }
  return out;
}

}  // namespace omramsey
