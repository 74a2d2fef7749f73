#pragma once

// Physical parameters of the linearized optomechanical system and the
// closed-form derived quantities built on them. All rates are angular,
// in rad/us, unless a function says otherwise.

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "units.hpp"

namespace omramsey {

using complex = std::complex<double>;

class PhysicalParams {
 public:
  /// Builds a parameter set from the two cavity loss channels; kappa is their sum.
  /// `delta` defaults to `omega_m` (drive locked to the red sideband).
  static PhysicalParams from_channels(double kappa_e, double kappa_i, double gamma_m, double omega_m,
                                      double big_g, std::optional<double> delta = std::nullopt) {
    PhysicalParams p;
    p.kappa_e_ = kappa_e;
    p.kappa_i_ = kappa_i;
    p.kappa_ = kappa_e + kappa_i;
    p.gamma_m_ = gamma_m;
    p.omega_m_ = omega_m;
    p.delta_ = delta.value_or(omega_m);
    p.big_g_ = big_g;
    p.validate();
    return p;
  }

  /// Critical coupling: kappa_e = kappa_i = kappa/2.
  static PhysicalParams critical(double kappa, double gamma_m, double omega_m, double big_g,
                                 std::optional<double> delta = std::nullopt) {
    return from_channels(kappa / 2.0, kappa / 2.0, gamma_m, omega_m, big_g, delta);
  }

  /// Parameter set of the silica-microsphere experiment:
  /// kappa/2pi = 30 MHz, G/2pi = 0.58 MHz, gamma_m/2pi = 20 kHz, omega_m/2pi = 94 MHz.
  static PhysicalParams microsphere() {
    return critical(units::mhz_to_rad_per_us(30.0), units::khz_to_rad_per_us(20.0),
                    units::mhz_to_rad_per_us(94.0), units::mhz_to_rad_per_us(0.58));
  }

  double kappa() const noexcept { return kappa_; }
  double kappa_e() const noexcept { return kappa_e_; }
  double kappa_i() const noexcept { return kappa_i_; }
  double gamma_m() const noexcept { return gamma_m_; }
  double omega_m() const noexcept { return omega_m_; }
  double delta() const noexcept { return delta_; }
  double big_g() const noexcept { return big_g_; }

  /// gamma_m << kappa; advisory only.
  bool ramsey_valid() const noexcept { return gamma_m_ < kappa_ / 100.0; }

  PhysicalParams with_big_g(double g) const { return rebuild([&](PhysicalParams& p) { p.big_g_ = g; }); }
  PhysicalParams with_gamma_m(double g) const { return rebuild([&](PhysicalParams& p) { p.gamma_m_ = g; }); }
  PhysicalParams with_delta(double d) const { return rebuild([&](PhysicalParams& p) { p.delta_ = d; }); }
  PhysicalParams with_omega_m(double w) const { return rebuild([&](PhysicalParams& p) { p.omega_m_ = w; }); }

  /// Rescales kappa keeping the external/intrinsic split ratio.
  PhysicalParams with_kappa(double kappa) const {
    const double ratio = kappa_e_ / kappa_;
    return from_channels(kappa * ratio, kappa * (1.0 - ratio), gamma_m_, omega_m_, big_g_, delta_);
  }

  bool operator==(const PhysicalParams&) const = default;

 private:
  PhysicalParams() = default;

  template <class F>
  PhysicalParams rebuild(F&& edit) const {
    PhysicalParams p = *this;
    edit(p);
    p.validate();
    return p;
  }

  void validate() const {
    std::vector<std::string> bad;
    auto finite = [&](double v, const char* name) {
      if (!std::isfinite(v)) bad.push_back(std::string(name) + " must be finite");
      return std::isfinite(v);
    };
    if (finite(kappa_e_, "kappa_e") && kappa_e_ < 0.0) bad.emplace_back("kappa_e must be >= 0");
    if (finite(kappa_i_, "kappa_i") && kappa_i_ < 0.0) bad.emplace_back("kappa_i must be >= 0");
    if (finite(kappa_, "kappa") && kappa_ <= 0.0) bad.emplace_back("kappa must be > 0");
    if (finite(gamma_m_, "gamma_m") && gamma_m_ <= 0.0) bad.emplace_back("gamma_m must be > 0");
    if (finite(omega_m_, "omega_m") && omega_m_ <= 0.0) bad.emplace_back("omega_m must be > 0");
    if (finite(big_g_, "big_g") && big_g_ < 0.0) bad.emplace_back("big_g must be >= 0");
    finite(delta_, "delta");
    if (!bad.empty()) throw ValidationError(std::move(bad));
  }

  double kappa_ = 0.0;
  double kappa_e_ = 0.0;
  double kappa_i_ = 0.0;
  double gamma_m_ = 0.0;
  double omega_m_ = 0.0;
  double delta_ = 0.0;
  double big_g_ = 0.0;
};

/// Probe-drive offset and the two frequency parameters of the rotating frame.
struct Detunings {
  double delta_pl = 0.0;  ///< omega_p - omega_l
  double x = 0.0;         ///< Delta - delta_pl
  double y = 0.0;         ///< omega_m - delta_pl
};

struct PumpState {
  complex alpha0{};
  complex beta0{};
};

/// Photon-phonon transfer rate Gamma = 2 G^2 / kappa + gamma_m / 2.
inline double transfer_rate(const PhysicalParams& p) {
  return 2.0 * p.big_g() * p.big_g() / p.kappa() + p.gamma_m() / 2.0;
}

inline Detunings detunings(const PhysicalParams& p, double delta_pl) {
  return {delta_pl, p.delta() - delta_pl, p.omega_m() - delta_pl};
}

/// Probe-drive offset that puts the probe at two-photon resonance offset `y`.
inline double delta_for_y(const PhysicalParams& p, double y) { return p.omega_m() - y; }

/// Drive amplitude E = sqrt(kappa P / (hbar omega)), SI in, 1/s out.
/// `carrier` and `kappa` in rad/s, `power` in W.
inline double power_to_amplitude(double power, double carrier, double kappa) {
  if (!(power >= 0.0)) throw DomainError("power_to_amplitude: power must be >= 0");
  if (!(carrier > 0.0)) throw DomainError("power_to_amplitude: carrier frequency must be > 0");
  if (!(kappa > 0.0)) throw DomainError("power_to_amplitude: kappa must be > 0");
  return std::sqrt(kappa * power / (units::hbar * carrier));
}

/// Single-photon coupling g = (omega_c / L) sqrt(hbar / (m omega_m)), rad/s.
inline double single_photon_coupling(double omega_c, double cavity_length, double eff_mass, double omega_m) {
  if (!(omega_c > 0.0) || !(cavity_length > 0.0) || !(eff_mass > 0.0) || !(omega_m > 0.0)) {
    throw DomainError("single_photon_coupling: all arguments must be > 0");
  }
  return omega_c / cavity_length * std::sqrt(units::hbar / (eff_mass * omega_m));
}

/// Steady pump amplitudes. `drive_amp` is in the same rate units as `p`.
/// beta0 needs the single-photon coupling `g`; it is 0 when g is 0.
inline PumpState steady_pump(complex drive_amp, const PhysicalParams& p, double g = 0.0) {
  const complex alpha0 = drive_amp / complex(p.kappa() / 2.0, p.delta());
  const complex beta0 = g * std::norm(alpha0) / complex(p.omega_m(), -p.gamma_m() / 2.0);
  return {alpha0, beta0};
}

/// Static radiation-pressure shift 2 |alpha0|^2 g^2 / omega_m folded into the effective Delta.
inline double pump_shift(const PumpState& pump, double g, const PhysicalParams& p) {
  return 2.0 * std::norm(pump.alpha0) * g * g / p.omega_m();
}

/// Driving-enhanced coupling G = |alpha0| g.
inline double enhanced_coupling(const PumpState& pump, double g) { return std::abs(pump.alpha0) * g; }

}  // namespace omramsey
