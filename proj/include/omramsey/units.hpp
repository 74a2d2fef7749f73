#pragma once

// Internal unit system: angular frequencies in rad/us, times in us.
// Everything that crosses the config/CSV boundary goes through these helpers.

#include <numbers>

namespace omramsey::units {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduced Planck constant, CODATA 2018 (exact since the SI redefinition), J s.
inline constexpr double hbar = 1.054571817e-34;

inline constexpr double speed_of_light = 299792458.0;  // m/s

/// Ordinary frequency in Hz -> angular frequency in rad/us.
constexpr double hz_to_rad_per_us(double hz) { return hz * two_pi * 1e-6; }
constexpr double khz_to_rad_per_us(double khz) { return hz_to_rad_per_us(khz * 1e3); }
constexpr double mhz_to_rad_per_us(double mhz) { return hz_to_rad_per_us(mhz * 1e6); }

/// Angular frequency in rad/us -> ordinary frequency in Hz.
constexpr double rad_per_us_to_hz(double w) { return w / two_pi * 1e6; }

/// rad/us <-> rad/s
constexpr double rad_per_us_to_rad_per_s(double w) { return w * 1e6; }
constexpr double rad_per_s_to_rad_per_us(double w) { return w * 1e-6; }

constexpr double seconds_to_us(double s) { return s * 1e6; }

/// Optical angular frequency (rad/s) of a vacuum wavelength in metres.
constexpr double wavelength_to_angular(double lambda_m) { return two_pi * speed_of_light / lambda_m; }

}  // namespace omramsey::units
