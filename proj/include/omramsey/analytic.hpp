#pragma once

// Closed-form results: approximate two-pulse Ramsey amplitudes, the
// steady-state OMIT response, and the textbook atomic Ramsey probabilities.
// These are cross-checks; quantitative work goes through the propagator.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "model.hpp"
#include "schedule.hpp"

namespace omramsey {

/// How the optical amplitude is formed from the mechanical one.
enum class OutputCoupling {
  /// kappa_e alpha_R = (2 G beta_R + 1) E_p, coefficient taken as printed.
  verbatim,
  /// (2 kappa_e / kappa)(1 + (2 G / kappa) kappa_e beta_R / E_p): the form whose
  /// long-pulse limit equals steady_omit at x = 0.
  steady_state_consistent,
};

struct RamseyAmplitudes {
  complex beta_r{};   ///< kappa_e beta_R / E_p
  complex alpha_r{};  ///< kappa_e alpha_R / E_p
  double phi = 0.0;   ///< y (tau2 + T)
  double mu = 0.0;    ///< gamma_m T / 2 + Gamma tau2
};

namespace detail {

/// (e^{-z tau} - 1) / z, finite at z = 0.
inline complex pulse_kernel(complex z, double tau) {
  if (std::abs(z * tau) < 1e-8) return -tau * (1.0 - z * tau / 2.0);
  return (std::exp(-z * tau) - 1.0) / z;
}

}  // namespace detail

/// Ramsey amplitudes after both pulses, from the two-path interference picture:
/// the tau1 excitation carries the phase e^{-i phi - mu}, the tau2 excitation does not.
inline RamseyAmplitudes ramsey_amplitudes(const PhysicalParams& p, const PulseSchedule& s, double y,
                                          OutputCoupling coupling = OutputCoupling::verbatim) {
  const double gamma = transfer_rate(p);
  const double g = p.big_g();
  const complex z(gamma, y);
  RamseyAmplitudes out;
  out.phi = y * (s.tau2 + s.gap);
  out.mu = p.gamma_m() / 2.0 * s.gap + gamma * s.tau2;
  const complex first = detail::pulse_kernel(z, s.tau1) * std::exp(complex(-out.mu, -out.phi));
  const complex second = detail::pulse_kernel(z, s.tau2);
  out.beta_r = g * (first + second);
  switch (coupling) {
    case OutputCoupling::verbatim:
      out.alpha_r = 2.0 * g * out.beta_r / p.kappa_e() + 1.0;
      break;
    case OutputCoupling::steady_state_consistent:
      out.alpha_r = 2.0 * p.kappa_e() / p.kappa() * (1.0 + 2.0 * g * out.beta_r / p.kappa());
      break;
  }
  return out;
}

/// The tau2 term of beta_R alone (first-pulse memory erased).
inline complex ramsey_second_pulse_term(const PhysicalParams& p, const PulseSchedule& s, double y) {
  const complex z(transfer_rate(p), y);
  return p.big_g() * detail::pulse_kernel(z, s.tau2);
}

/// Steady-state kappa_e alpha_ss / E_p with alpha_ss = E_p / [(i x + kappa/2) + G^2 / (i y + gamma_m/2)].
inline complex steady_omit(const PhysicalParams& p, const Detunings& det) {
  const double g = p.big_g();
  const complex denom = complex(p.kappa() / 2.0, det.x) + g * g / complex(p.gamma_m() / 2.0, det.y);
  return p.kappa_e() / denom;
}

struct RamseyProbabilities {
  double single = 0.0;  ///< p_s
  double ramsey = 0.0;  ///< p_R
};

/// Unnormalized sinc, sin(z)/z.
inline double sinc(double z) {
  if (std::abs(z) < 1e-6) return 1.0 - z * z / 6.0;
  return std::sin(z) / z;
}

/// Weak-pulse atomic Ramsey: p_s = g^2 tau^2 sinc^2(delta tau / 2), p_R = p_s (cos(delta T) + 1).
inline RamseyProbabilities classic_ramsey(double rabi_g, double tau, double delta, double gap) {
  const double env = sinc(delta * tau / 2.0);
  const double ps = rabi_g * rabi_g * tau * tau * env * env;
  return {ps, ps * (std::cos(delta * gap) + 1.0)};
}

struct FringeConditions {
  bool first_pulse_long = false;   ///< tau1 Gamma >= 0.5
  bool second_pulse_short = false; ///< tau2 Gamma < 1
  bool gap_coherent = false;       ///< T gamma_m < 0.1
};

struct FringeScales {
  double naive_period = 0.0;  ///< 2 pi / (T + tau2), rad/us; +inf when T + tau2 = 0
  double mu = 0.0;
  FringeConditions conditions;
};

inline FringeScales fringe_scales(const PhysicalParams& p, const PulseSchedule& s) {
  const double gamma = transfer_rate(p);
  const double window = s.gap + s.tau2;
  FringeScales out;
  out.naive_period = window > 0.0 ? 2.0 * std::numbers::pi / window : std::numeric_limits<double>::infinity();
  out.mu = p.gamma_m() / 2.0 * s.gap + gamma * s.tau2;
  out.conditions.first_pulse_long = s.tau1 * gamma >= 0.5;
  out.conditions.second_pulse_short = s.tau2 * gamma < 1.0;
  out.conditions.gap_coherent = s.gap * p.gamma_m() < 0.1;
  return out;
}

}  // namespace omramsey
