#pragma once

// Test-only reference computations. Nothing here shares code with the
// production propagator: the matrix exponential is a scaling-and-squaring
// Taylor series on the 3x3 augmented matrix [[A, b], [0, 0]].

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using cx = std::complex<double>;
using M3 = std::array<std::array<cx, 3>, 3>;

inline M3 mul(const M3& a, const M3& b) {
  M3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline M3 expm(M3 a) {
  double norm = 0.0;
  for (auto& r : a)
    for (auto& v : r) norm = std::max(norm, std::abs(v));
  int squarings = 0;
  while (norm > 0.05) {
    norm /= 2.0;
    ++squarings;
  }
  const double scale = std::ldexp(1.0, -squarings);
  for (auto& r : a)
    for (auto& v : r) v *= scale;
  M3 result{};
  M3 term{};
  for (int i = 0; i < 3; ++i) result[i][i] = term[i][i] = 1.0;
  for (int n = 1; n <= 20; ++n) {
    term = mul(term, a);
    for (auto& r : term)
      for (auto& v : r) v /= static_cast<double>(n);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) result[i][j] += term[i][j];
  }
  for (int s = 0; s < squarings; ++s) result = mul(result, result);
  return result;
}

struct Coeffs {
  double x, y, kappa, gamma_m, g;
  cx probe;
};

/// State after time t of alpha' = -(ix + k/2) alpha - g beta + E, beta' = -(iy + gm/2) beta + g alpha.
inline std::pair<cx, cx> flow(const Coeffs& c, cx alpha0, cx beta0, double t) {
  M3 a{};
  a[0][0] = cx(-c.kappa / 2.0, -c.x) * t;
  a[0][1] = -c.g * t;
  a[0][2] = c.probe * t;
  a[1][0] = c.g * t;
  a[1][1] = cx(-c.gamma_m / 2.0, -c.y) * t;
  const auto e = expm(a);
  return {e[0][0] * alpha0 + e[0][1] * beta0 + e[0][2], e[1][0] * alpha0 + e[1][1] * beta0 + e[1][2]};
}

/// Adiabatic single-pulse transient at y = x = 0: alpha follows beta, and
/// kappa_e alpha / E = 1 - c (1 - e^{-Gamma t}) with c = 2 G^2 / (kappa Gamma),
/// at critical coupling. Returns the mean of its square over [t0, t1].
inline double single_pulse_gate_mean(double kappa, double gamma_m, double g, double t0, double t1) {
  const double gamma = 2.0 * g * g / kappa + gamma_m / 2.0;
  const double c = 2.0 * g * g / (kappa * gamma);
  auto avg_exp = [&](double rate) { return (std::exp(-rate * t0) - std::exp(-rate * t1)) / (rate * (t1 - t0)); };
  return (1 - c) * (1 - c) + 2 * (1 - c) * c * avg_exp(gamma) + c * c * avg_exp(2 * gamma);
}

/// Portable N(0, 1) draws (Box-Muller on the top 53 bits of mt19937_64).
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}
  double operator()() {
    const double u1 = (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 rng_;
};

inline double rel_err(cx a, cx b, double floor = 1e-300) {
  return std::abs(a - b) / std::max(std::max(std::abs(a), std::abs(b)), floor);
}

}  // namespace oracle
