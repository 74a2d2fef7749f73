#pragma once

// Linearized sideband dynamics in the rotating-wave form
//
//   alpha' = -(i x + kappa/2) alpha - G(t) beta + E_p(t)
//   beta'  = -(i y + gamma_m/2) beta + G(t) alpha
//
// integrated exactly over each constant-coefficient segment. rk_oracle is an
// independent fixed-step RK4 integrator kept for verification only.

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "error.hpp"
#include "linear2.hpp"
#include "model.hpp"
#include "schedule.hpp"

namespace omramsey {

struct SystemState {
  complex alpha{};
  complex beta{};
  double t = 0.0;
};

struct TraceSample {
  double t = 0.0;
  complex alpha{};
  complex beta{};
};

struct Trace {
  std::vector<TraceSample> samples;
  double sample_dt = 0.0;
};

inline constexpr double kDefaultSampleDt = 1e-3;  // us

namespace detail {

inline linalg::Mat2 system_matrix(const Segment& seg, const Detunings& det, const PhysicalParams& p) {
  const double g = seg.g_on ? p.big_g() : 0.0;
  return {complex(-p.kappa() / 2.0, -det.x), complex(-g), complex(g), complex(-p.gamma_m() / 2.0, -det.y)};
}

inline linalg::Vec2 source(const Segment& seg) { return {seg.probe, 0.0}; }

inline linalg::Vec2 rhs(const linalg::Mat2& a, const linalg::Vec2& b, const linalg::Vec2& v) {
  return a * v + b;
}

/// Number of equal sub-steps used to sample a segment at nominal spacing dt.
inline std::size_t sample_steps(double duration, double dt) {
  const double n = std::ceil(duration / dt - 1e-9);
  return static_cast<std::size_t>(std::max(1.0, n));
}

/// Interior samples k = 1..n-1 of a segment, stepping with the one-step flow
/// e^{Ah}. Shared by the dense and gated paths so both see identical values.
template <class Visit>
void sample_interior(const linalg::AffineFlow& flow, const linalg::Vec2& v0, std::size_t n, double h, Visit&& visit) {
  if (n < 2) return;
  const auto step = flow.exp(h);
  const auto& p = flow.steady_state();
  auto w = v0 - p;
  for (std::size_t k = 1; k < n; ++k) {
    w = step * w;
    visit(h * static_cast<double>(k), w + p);
  }
}

inline std::vector<Segment> gated_segments(const PulseSchedule& s) {
  return split_at(split_at(compile(s), s.gate_start), s.gate_end());
}

}  // namespace detail

/// Exact state after `seg.duration`. Time advances by the duration.
inline SystemState propagate_segment(const SystemState& state, const Segment& seg, const Detunings& det,
                                     const PhysicalParams& params) {
  if (!(seg.duration >= 0.0)) throw DomainError("propagate_segment: negative duration");
  if (seg.duration == 0.0) return state;
  const linalg::AffineFlow flow(detail::system_matrix(seg, det, params), detail::source(seg));
  const auto v = flow.at({state.alpha, state.beta}, seg.duration);
  return {v.a, v.b, state.t + seg.duration};
}

/// Classical RK4 with step `dt`; the last step is shortened to land on the segment end.
inline SystemState rk_oracle(const SystemState& state, const Segment& seg, const Detunings& det,
                             const PhysicalParams& params, double dt) {
  if (!(dt > 0.0)) throw DomainError("rk_oracle: dt must be > 0");
  if (!(seg.duration >= 0.0)) throw DomainError("rk_oracle: negative duration");
  const auto a = detail::system_matrix(seg, det, params);
  const auto b = detail::source(seg);
  linalg::Vec2 v{state.alpha, state.beta};
  const auto full_steps = static_cast<std::size_t>(std::floor(seg.duration / dt));
  auto step = [&](double h) {
    const auto k1 = detail::rhs(a, b, v);
    const auto k2 = detail::rhs(a, b, v + complex(h / 2.0) * k1);
    const auto k3 = detail::rhs(a, b, v + complex(h / 2.0) * k2);
    const auto k4 = detail::rhs(a, b, v + complex(h) * k3);
    v = v + complex(h / 6.0) * (k1 + complex(2.0) * k2 + complex(2.0) * k3 + k4);
  };
  for (std::size_t i = 0; i < full_steps; ++i) step(dt);
  const double rest = seg.duration - static_cast<double>(full_steps) * dt;
  if (rest > 1e-12 * dt) step(rest);
  return {v.a, v.b, state.t + seg.duration};
}

/// Dense samples over a segment list starting from `initial`. Segment
/// boundaries are always sample points; zero-length segments add no samples.
inline Trace run_segments(std::span<const Segment> segments, const Detunings& det, const PhysicalParams& params,
                          double sample_dt, const SystemState& initial = {}) {
  if (!(sample_dt > 0.0)) throw DomainError("run_segments: sample_dt must be > 0");
  Trace trace;
  trace.sample_dt = sample_dt;
  linalg::Vec2 v{initial.alpha, initial.beta};
  double start = initial.t;
  trace.samples.push_back({start, v.a, v.b});
  for (const auto& seg : segments) {
    if (!(seg.duration >= 0.0)) throw DomainError("run_segments: negative duration");
    if (seg.duration == 0.0) continue;
    const linalg::AffineFlow flow(detail::system_matrix(seg, det, params), detail::source(seg));
    const std::size_t n = detail::sample_steps(seg.duration, sample_dt);
    const double h = seg.duration / static_cast<double>(n);
    const double end = start + seg.duration;
    detail::sample_interior(flow, v, n, h, [&](double tau, const linalg::Vec2& s) {
      trace.samples.push_back({start + tau, s.a, s.b});
    });
    v = flow.at(v, seg.duration);
    trace.samples.push_back({end, v.a, v.b});
    start = end;
  }
  return trace;
}

/// Starts from alpha = beta = 0 at t = 0 unless `initial` says otherwise.
/// The gate edges are inserted as segment boundaries so the gate is sampled exactly.
inline Trace run_schedule(const PulseSchedule& schedule, const Detunings& det, const PhysicalParams& params,
                          double sample_dt = kDefaultSampleDt, const SystemState& initial = {}) {
  const auto segments = detail::gated_segments(schedule);
  return run_segments(segments, det, params, sample_dt, initial);
}

namespace detail {

inline double normalized_power(complex alpha, double kappa_e, complex probe) {
  const double ref = std::norm(probe);
  const double p = std::norm(kappa_e * alpha);
  return ref > 0.0 ? p / ref : p;
}

}  // namespace detail

/// Mean of |kappa_e alpha|^2 / |E_p|^2 over the gate window (trapezoid on samples).
/// With E_p = 0 the unnormalized mean is returned, which is 0 for an undriven system.
inline double gated_intensity(const Trace& trace, const PulseSchedule& schedule, const PhysicalParams& params) {
  const double t0 = schedule.gate_start;
  const double t1 = schedule.gate_end();
  const double tol = 1e-9 * std::max(1.0, t1);
  if (trace.samples.empty() || t0 < trace.samples.front().t - tol || t1 > trace.samples.back().t + tol) {
    throw std::out_of_range("gated_intensity: gate window outside trace");
  }
  double acc = 0.0;
  double span = 0.0;
  const TraceSample* prev = nullptr;
  double prev_val = 0.0;
  for (const auto& s : trace.samples) {
    if (s.t < t0 - tol || s.t > t1 + tol) continue;
    const double val = detail::normalized_power(s.alpha, params.kappa_e(), schedule.probe_amp);
    if (prev != nullptr) {
      const double h = s.t - prev->t;
      acc += 0.5 * h * (val + prev_val);
      span += h;
    }
    prev = &s;
    prev_val = val;
  }
  if (span <= 0.0) throw std::out_of_range("gated_intensity: gate window holds fewer than two samples");
  return acc / span;
}

/// gated_intensity(run_schedule(...)) without materializing the samples
/// outside the gate. Produces bit-identical results.
inline double gated_response(const PulseSchedule& schedule, const Detunings& det, const PhysicalParams& params,
                             double sample_dt = kDefaultSampleDt) {
  if (!(sample_dt > 0.0)) throw DomainError("gated_response: sample_dt must be > 0");
  const auto segments = detail::gated_segments(schedule);
  const double t0 = schedule.gate_start;
  const double t1 = schedule.gate_end();
  const double tol = 1e-9 * std::max(1.0, t1);
  const double kappa_e = params.kappa_e();

  linalg::Vec2 v{};
  double start = 0.0;
  double acc = 0.0;
  double span = 0.0;
  bool have_prev = false;
  double prev_t = 0.0;
  double prev_val = 0.0;
  auto visit = [&](double t, const linalg::Vec2& s) {
    if (t < t0 - tol || t > t1 + tol) return;
    const double val = detail::normalized_power(s.a, kappa_e, schedule.probe_amp);
    if (have_prev) {
      acc += 0.5 * (t - prev_t) * (val + prev_val);
      span += t - prev_t;
    }
    have_prev = true;
    prev_t = t;
    prev_val = val;
  };
  visit(0.0, v);
  for (const auto& seg : segments) {
    if (seg.duration == 0.0) continue;
    const double end = start + seg.duration;
    const linalg::AffineFlow flow(detail::system_matrix(seg, det, params), detail::source(seg));
    if (end > t0 + tol && start < t1 - tol) {
      const std::size_t n = detail::sample_steps(seg.duration, sample_dt);
      const double h = seg.duration / static_cast<double>(n);
      detail::sample_interior(flow, v, n, h, [&](double tau, const linalg::Vec2& s) { visit(start + tau, s); });
    }
    v = flow.at(v, seg.duration);
    visit(end, v);
    start = end;
    if (start > t1 + tol) break;
  }
  if (span <= 0.0) throw std::out_of_range("gated_response: gate window holds fewer than two samples");
  return acc / span;
}

}  // namespace omramsey
