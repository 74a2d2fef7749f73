#pragma once

// Spectra over the probe-drive detuning, fringe observables, parameter
// scans and least-squares fits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "analytic.hpp"
#include "error.hpp"
#include "model.hpp"
#include "nelder_mead.hpp"
#include "parallel.hpp"
#include "propagator.hpp"
#include "schedule.hpp"
#include "units.hpp"

namespace omramsey {

/// Uniform grid in the two-photon detuning y = omega_m - delta_pl, rad/us.
/// Defaults cover y/2pi in [-0.6, 0.6] MHz with 2001 points.
struct DetuningGrid {
  double center = 0.0;
  double span = units::mhz_to_rad_per_us(1.2);
  std::size_t points = 2001;

  bool operator==(const DetuningGrid&) const = default;
};

/// Probe-drive offsets of the grid, ascending.
inline std::vector<double> grid_deltas(const PhysicalParams& p, const DetuningGrid& g) {
  if (g.points < 2 || !(g.span > 0.0) || !std::isfinite(g.center)) {
    throw ValidationError({"detuning grid needs >= 2 points and span > 0"});
  }
  std::vector<double> out(g.points);
  const double step = g.span / static_cast<double>(g.points - 1);
  const double y_hi = g.center + g.span / 2.0;
  // Ascending delta_pl is descending y.
  for (std::size_t i = 0; i < g.points; ++i) out[i] = delta_for_y(p, y_hi - step * static_cast<double>(i));
  return out;
}

struct SpectrumPoint {
  double delta_pl = 0.0;
  double intensity = 0.0;
};

struct Spectrum {
  std::vector<SpectrumPoint> points;  ///< strictly increasing delta_pl
  PhysicalParams params = PhysicalParams::microsphere();
  PulseSchedule schedule;
  std::optional<DetuningGrid> grid;
  double sample_dt = kDefaultSampleDt;

  double y_of(double delta_pl) const { return params.omega_m() - delta_pl; }
};

struct SweepOptions {
  double sample_dt = kDefaultSampleDt;
  unsigned workers = 1;
};

inline void require_grid(std::span<const double> deltas) {
  if (deltas.size() < 2) throw ValidationError({"detuning grid needs >= 2 points"});
  for (std::size_t i = 1; i < deltas.size(); ++i) {
    if (!(deltas[i] > deltas[i - 1])) throw ValidationError({"detuning grid must be strictly increasing"});
  }
}

/// Gated intensity at each probe-drive offset in `deltas`.
inline Spectrum sweep_at(const PhysicalParams& params, const PulseSchedule& schedule, std::span<const double> deltas,
                         const SweepOptions& opt = {}) {
  require_grid(deltas);
  schedule.validate();
  Spectrum out;
  out.params = params;
  out.schedule = schedule;
  out.sample_dt = opt.sample_dt;
  out.points.resize(deltas.size());
  parallel_for(deltas.size(), opt.workers, [&](std::size_t i) {
    const auto det = detunings(params, deltas[i]);
    out.points[i] = {deltas[i], gated_response(schedule, det, params, opt.sample_dt)};
  });
  return out;
}

inline Spectrum sweep(const PhysicalParams& params, const PulseSchedule& schedule, const DetuningGrid& grid = {},
                      const SweepOptions& opt = {}) {
  const auto deltas = grid_deltas(params, grid);
  auto out = sweep_at(params, schedule, deltas, opt);
  out.grid = grid;
  return out;
}

// ---------------------------------------------------------------------------
// Fringe extraction

struct FringeReport {
  double central_dip = 0.0;          ///< delta_pl of the global minimum (refined)
  std::vector<double> minima;        ///< refined local minima inside the band, ascending delta_pl
  std::optional<double> period;      ///< mean adjacent spacing; absent with < 2 minima
  double visibility = 0.0;
  double band = 0.0;                 ///< full width of the analysis band

  bool has_fringes() const { return period.has_value(); }
};

/// Default analysis band: three naive fringe periods, 3 * 2pi / (T + tau2).
inline double default_band(const PulseSchedule& s) {
  const double window = s.gap + s.tau2;
  return window > 0.0 ? 3.0 * 2.0 * std::numbers::pi / window : std::numeric_limits<double>::infinity();
}

namespace detail {

struct Vertex {
  double x = 0.0;
  double f = 0.0;
};

/// Vertex of the parabola through three points; falls back to the middle point.
inline Vertex parabola_vertex(double x0, double f0, double x1, double f1, double x2, double f2) {
  const double d0 = x1 - x0;
  const double d2 = x1 - x2;
  const double num = d0 * d0 * (f1 - f2) - d2 * d2 * (f1 - f0);
  const double den = d0 * (f1 - f2) - d2 * (f1 - f0);
  if (den == 0.0 || !std::isfinite(num / den)) return {x1, f1};
  const double x = x1 - 0.5 * num / den;
  if (x < x0 || x > x2) return {x1, f1};
  // Lagrange form evaluated at the vertex.
  const double l0 = (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2));
  const double l1 = (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2));
  const double l2 = (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1));
  return {x, f0 * l0 + f1 * l1 + f2 * l2};
}

inline Vertex refine(const std::vector<SpectrumPoint>& pts, std::size_t i) {
  if (i == 0 || i + 1 >= pts.size()) return {pts[i].delta_pl, pts[i].intensity};
  return parabola_vertex(pts[i - 1].delta_pl, pts[i - 1].intensity, pts[i].delta_pl, pts[i].intensity,
                         pts[i + 1].delta_pl, pts[i + 1].intensity);
}

inline bool is_local_min(const std::vector<SpectrumPoint>& p, std::size_t i) {
  return p[i].intensity < p[i - 1].intensity && p[i].intensity < p[i + 1].intensity;
}

inline bool is_local_max(const std::vector<SpectrumPoint>& p, std::size_t i) {
  return p[i].intensity > p[i - 1].intensity && p[i].intensity > p[i + 1].intensity;
}

}  // namespace detail

/// Fringe observables within a band of full width `band` centered on the global minimum.
///
/// Visibility is measured on the innermost fringe flanking the central dip:
/// for the first side minimum on each side, (I_max - I_min) / (I_max + I_min)
/// with I_max the mean of its two bracketing maxima; the sides are averaged.
/// It is 0 when the band holds no side minimum.
inline FringeReport extract(const Spectrum& spectrum, double band) {
  const auto& pts = spectrum.points;
  if (pts.size() < 3) throw ValidationError({"extract needs at least 3 spectrum points"});
  FringeReport rep;
  rep.band = band;

  const auto global = static_cast<std::size_t>(
      std::min_element(pts.begin(), pts.end(),
                       [](const auto& a, const auto& b) { return a.intensity < b.intensity; }) -
      pts.begin());
  const auto centre = detail::refine(pts, global);
  rep.central_dip = centre.x;

  std::vector<std::size_t> minima_idx;
  std::vector<std::size_t> maxima_idx;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    if (detail::is_local_min(pts, i) && std::abs(pts[i].delta_pl - centre.x) <= band / 2.0) minima_idx.push_back(i);
    if (detail::is_local_max(pts, i)) maxima_idx.push_back(i);
  }
  for (auto i : minima_idx) rep.minima.push_back(detail::refine(pts, i).x);
  if (rep.minima.size() >= 2) {
    rep.period = (rep.minima.back() - rep.minima.front()) / static_cast<double>(rep.minima.size() - 1);
  }

  double vis_sum = 0.0;
  int sides = 0;
  auto side_visibility = [&](std::optional<std::size_t> side_min) {
    if (!side_min) return;
    const auto m = *side_min;
    auto below = std::find_if(maxima_idx.rbegin(), maxima_idx.rend(), [&](auto i) { return i < m; });
    auto above = std::find_if(maxima_idx.begin(), maxima_idx.end(), [&](auto i) { return i > m; });
    if (below == maxima_idx.rend() || above == maxima_idx.end()) return;
    const double i_max = 0.5 * (detail::refine(pts, *below).f + detail::refine(pts, *above).f);
    const double i_min = detail::refine(pts, m).f;
    if (i_max + i_min > 0.0) {
      vis_sum += std::clamp((i_max - i_min) / (i_max + i_min), 0.0, 1.0);
      ++sides;
    }
  };
  std::optional<std::size_t> left, right;
  for (auto i : minima_idx) {
    if (i < global) left = i;
    if (i > global && !right) right = i;
  }
  side_visibility(left);
  side_visibility(right);
  rep.visibility = sides > 0 ? vis_sum / sides : 0.0;
  return rep;
}

inline FringeReport extract(const Spectrum& spectrum) { return extract(spectrum, default_band(spectrum.schedule)); }

// ---------------------------------------------------------------------------
// Parameter scans

enum class ScanAxis { tau2, gap, gamma_m };

struct ScanEntry {
  double value = 0.0;
  Spectrum spectrum;
  FringeReport report;
};

/// Schedule/parameters for one scan value. For tau2 the gate keeps its
/// trailing-edge position and is shortened to tau2 if it would not fit.
inline std::pair<PhysicalParams, PulseSchedule> scan_point(const PhysicalParams& params, const PulseSchedule& schedule,
                                                           ScanAxis axis, double value) {
  PhysicalParams p = params;
  PulseSchedule s = schedule;
  auto regate = [](PulseSchedule& x) {
    if (x.gate_mode == GateMode::second_pair) x.gate_start = x.gate_end_reference() - x.gate_len;
  };
  switch (axis) {
    case ScanAxis::tau2:
      s.tau2 = value;
      s.gate_len = std::min(schedule.gate_len, value);
      regate(s);
      break;
    case ScanAxis::gap:
      s.gap = value;
      regate(s);
      break;
    case ScanAxis::gamma_m:
      p = params.with_gamma_m(value);
      break;
  }
  s.validate();
  return {p, s};
}

inline std::vector<ScanEntry> scan(const PhysicalParams& params, const PulseSchedule& schedule, ScanAxis axis,
                                   std::span<const double> values, const DetuningGrid& grid = {},
                                   const SweepOptions& opt = {}) {
  if (values.empty()) throw ValidationError({"scan needs at least one value"});
  std::vector<ScanEntry> out;
  out.reserve(values.size());
  for (double v : values) {
    auto [p, s] = scan_point(params, schedule, axis, v);
    auto spec = sweep(p, s, grid, opt);
    auto rep = extract(spec);
    out.push_back({v, std::move(spec), std::move(rep)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fitting

enum class FreeParam { big_g, kappa, gamma_m, delta_offset };

struct FitOptions {
  SimplexOptions simplex{};
  SweepOptions sweep{};
};

struct FitResult {
  PhysicalParams params_hat = PhysicalParams::microsphere();
  double residual = 0.0;  ///< RMS intensity residual
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

namespace detail {

inline PhysicalParams apply_free(const PhysicalParams& base, std::span<const FreeParam> free,
                                 std::span<const double> x) {
  PhysicalParams p = base;
  for (std::size_t k = 0; k < free.size(); ++k) {
    switch (free[k]) {
      case FreeParam::big_g: p = p.with_big_g(std::exp(x[k])); break;
      case FreeParam::kappa: p = p.with_kappa(std::exp(x[k])); break;
      case FreeParam::gamma_m: p = p.with_gamma_m(std::exp(x[k])); break;
      case FreeParam::delta_offset: p = p.with_delta(base.delta() + x[k]); break;
    }
  }
  return p;
}

}  // namespace detail

/// Mean squared residual between `observed` and the model spectrum at `p`.
inline double fit_objective(const Spectrum& observed, const std::vector<double>& deltas, const PhysicalParams& p,
                            const SweepOptions& opt) {
  const auto model = sweep_at(p, observed.schedule, deltas, opt);
  double acc = 0.0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double r = model.points[i].intensity - observed.points[i].intensity;
    acc += r * r;
  }
  return acc / static_cast<double>(deltas.size());
}

/// Least-squares fit of the `free` parameters starting from `initial`.
/// Rates are searched in log space; the Delta offset linearly (rad/us).
inline FitResult fit(const Spectrum& observed, const PhysicalParams& initial, std::span<const FreeParam> free,
                     const FitOptions& opt = {}) {
  std::vector<double> deltas;
  deltas.reserve(observed.points.size());
  for (const auto& pt : observed.points) {
    if (!std::isfinite(pt.intensity)) throw ValidationError({"observed spectrum holds a non-finite intensity"});
    deltas.push_back(pt.delta_pl);
  }
  require_grid(deltas);
  if (free.empty()) throw ValidationError({"fit needs at least one free parameter"});
  if (std::set<FreeParam>(free.begin(), free.end()).size() != free.size()) {
    throw ValidationError({"fit free parameters must be distinct"});
  }

  std::vector<double> x0;
  for (auto f : free) {
    switch (f) {
      case FreeParam::big_g:
        if (!(initial.big_g() > 0.0)) throw ValidationError({"fit: initial G must be > 0 to fit it"});
        x0.push_back(std::log(initial.big_g()));
        break;
      case FreeParam::kappa: x0.push_back(std::log(initial.kappa())); break;
      case FreeParam::gamma_m: x0.push_back(std::log(initial.gamma_m())); break;
      case FreeParam::delta_offset: x0.push_back(0.0); break;
    }
  }

  auto objective = [&](const std::vector<double>& x) {
    try {
      return fit_objective(observed, deltas, detail::apply_free(initial, free, x), opt.sweep);
    } catch (const ValidationError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  const auto res = minimize_simplex(objective, x0, opt.simplex);
  FitResult out;
  out.params_hat = detail::apply_free(initial, free, res.x);
  out.residual = std::sqrt(res.value);
  out.iterations = res.iterations;
  out.evaluations = res.evaluations;
  out.converged = res.converged;
  return out;
}

}  // namespace omramsey
