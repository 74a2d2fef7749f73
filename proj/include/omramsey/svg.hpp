#pragma once

// Minimal SVG line plots: frame, ticks, labels, one polyline per series.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace omramsey::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Round tick step giving about `n` intervals over [lo, hi].
inline double nice_step(double lo, double hi, int n) {
  const double raw = (hi - lo) / n;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  return (r < 1.5 ? 1.0 : r < 3.0 ? 2.0 : r < 7.0 ? 5.0 : 10.0) * mag;
}

}  // namespace detail

inline std::string line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                             std::span<const Series> series) {
  constexpr double W = 800, H = 500, L = 80, R = 160, T = 40, B = 60;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#000000", "#9467bd", "#ff7f0e", "#8c564b"};

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (double v : s.x) xmin = std::min(xmin, v), xmax = std::max(xmax, v);
    for (double v : s.y) ymin = std::min(ymin, v), ymax = std::max(ymax, v);
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };
  using detail::num;

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" viewBox=\"0 0 800 500\">\n";
  out += "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(W / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
         detail::escape(title) + "</text>\n";
  out += "<rect x=\"" + num(L) + "\" y=\"" + num(T) + "\" width=\"" + num(W - L - R) + "\" height=\"" +
         num(H - T - B) + "\" fill=\"none\" stroke=\"black\"/>\n";

  const double xs = detail::nice_step(xmin, xmax, 6);
  for (double v = std::ceil(xmin / xs) * xs; v <= xmax + 1e-9 * xs; v += xs) {
    out += "<line x1=\"" + num(px(v)) + "\" y1=\"" + num(H - B) + "\" x2=\"" + num(px(v)) + "\" y2=\"" +
           num(H - B + 5) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(px(v)) + "\" y=\"" + num(H - B + 20) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + detail::tick_label(v) +
           "</text>\n";
  }
  const double ys = detail::nice_step(ymin, ymax, 5);
  for (double v = std::ceil(ymin / ys) * ys; v <= ymax + 1e-9 * ys; v += ys) {
    out += "<line x1=\"" + num(L - 5) + "\" y1=\"" + num(py(v)) + "\" x2=\"" + num(L) + "\" y2=\"" + num(py(v)) +
           "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(L - 8) + "\" y=\"" + num(py(v) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" + detail::tick_label(v) +
           "</text>\n";
  }
  out += "<text x=\"" + num(L + (W - L - R) / 2) + "\" y=\"" + num(H - 15) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + detail::escape(x_label) +
         "</text>\n";
  out += "<text x=\"18\" y=\"" + num(T + (H - T - B) / 2) + "\" transform=\"rotate(-90 18 " +
         num(T + (H - T - B) / 2) + ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
         detail::escape(y_label) + "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = colors[k % std::size(colors)];
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (i) out += ' ';
      out += num(px(s.x[i])) + ',' + num(py(s.y[i]));
    }
    out += "\"/>\n";
    const double ly = T + 15 + 18 * static_cast<double>(k);
    out += "<line x1=\"" + num(W - R + 10) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(W - R + 30) + "\" y2=\"" +
           num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + num(W - R + 35) + "\" y=\"" + num(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + detail::escape(s.label) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace omramsey::svg
