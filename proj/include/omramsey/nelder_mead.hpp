#pragma once

// Derivative-free simplex minimization (Nelder-Mead with the standard
// reflection/expansion/contraction/shrink coefficients 1, 2, 1/2, 1/2).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace omramsey {

struct SimplexOptions {
  double x_tol = 1e-10;              ///< stop when every vertex is this close to the best (max-norm)
  double f_tol = 1e-12;              ///< ... or the best value improved less than this
  std::size_t f_window = 50;         ///< ... over this many iterations
  std::size_t max_iterations = 2000;
  double initial_step = 0.1;
  double jitter = 0.1;               ///< relative random jitter on the initial steps
  std::uint64_t seed = 1;
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace detail

template <class F>
SimplexResult minimize_simplex(F&& f, std::vector<double> x0, const SimplexOptions& opt = {}) {
  const std::size_t n = x0.size();
  SimplexResult res;
  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  std::mt19937_64 rng(opt.seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = 2.0 * detail::unit_uniform(rng) - 1.0;
    pts[i + 1][i] += opt.initial_step * (1.0 + opt.jitter * u);
  }
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(n + 1);
  std::deque<double> history;
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::vector<std::vector<double>> p2;
    std::vector<double> v2;
    for (auto i : order) {
      p2.push_back(pts[i]);
      v2.push_back(vals[i]);
    }
    pts = std::move(p2);
    vals = std::move(v2);
  };
  auto diameter = [&] {
    double d = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k) d = std::max(d, std::abs(pts[i][k] - pts[0][k]));
    return d;
  };
  auto blend = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = c[k] + t * (w[k] - c[k]);
    return out;
  };

  sort_simplex();
  while (true) {
    history.push_back(vals[0]);
    if (history.size() > opt.f_window + 1) history.pop_front();
    if (diameter() < opt.x_tol ||
        (history.size() == opt.f_window + 1 && history.front() - history.back() < opt.f_tol)) {
      res.converged = true;
      break;
    }
    if (res.iterations >= opt.max_iterations) break;
    ++res.iterations;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / static_cast<double>(n);

    const auto xr = blend(centroid, pts[n], -1.0);
    const double fr = eval(xr);
    if (fr < vals[0]) {
      const auto xe = blend(centroid, pts[n], -2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[n] = xe;
        vals[n] = fe;
      } else {
        pts[n] = xr;
        vals[n] = fr;
      }
    } else if (fr < vals[n - 1]) {
      pts[n] = xr;
      vals[n] = fr;
    } else {
      const bool outside = fr < vals[n];
      const auto xc = outside ? blend(centroid, xr, 0.5) : blend(centroid, pts[n], 0.5);
      const double fc = eval(xc);
      if (fc < (outside ? fr : vals[n])) {
        pts[n] = xc;
        vals[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          pts[i] = blend(pts[0], pts[i], 0.5);
          vals[i] = eval(pts[i]);
        }
      }
    }
    sort_simplex();
  }
  res.x = pts[0];
  res.value = vals[0];
  return res;
}

}  // namespace omramsey
