#pragma once

// Exact flow of a constant-coefficient affine system v' = A v + b with a
// 2x2 complex A. Uses the eigenvalues of A and Sylvester's formula written
// as a divided difference, so it stays finite when one mode decays much
// faster than the other and passes continuously into the Jordan limit.

#include <array>
#include <cmath>
#include <complex>

namespace omramsey::linalg {

using complex = std::complex<double>;

struct Vec2 {
  complex a{};
  complex b{};

  friend Vec2 operator+(const Vec2& u, const Vec2& v) { return {u.a + v.a, u.b + v.b}; }
  friend Vec2 operator-(const Vec2& u, const Vec2& v) { return {u.a - v.a, u.b - v.b}; }
  friend Vec2 operator*(complex s, const Vec2& v) { return {s * v.a, s * v.b}; }
  bool operator==(const Vec2&) const = default;
};

struct Mat2 {
  // row-major [[m00, m01], [m10, m11]]
  complex m00{}, m01{}, m10{}, m11{};

  Vec2 operator*(const Vec2& v) const { return {m00 * v.a + m01 * v.b, m10 * v.a + m11 * v.b}; }
  complex trace() const { return m00 + m11; }
  complex det() const { return m00 * m11 - m01 * m10; }

  /// Solves M u = v by Cramer's rule.
  Vec2 solve(const Vec2& v) const {
    const complex d = det();
    return {(m11 * v.a - m01 * v.b) / d, (m00 * v.b - m10 * v.a) / d};
  }
};

/// e^z - 1 without cancellation for small |z|.
inline complex expm1(complex z) {
  const double re = z.real();
  const double im = z.imag();
  const double s = std::sin(im / 2.0);
  return {std::expm1(re) * std::cos(im) - 2.0 * s * s, std::exp(re) * std::sin(im)};
}

/// (e^z - 1) / z, equal to 1 at z = 0.
inline complex phi1(complex z) {
  if (std::abs(z) < 1e-4) return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
  return expm1(z) / z;
}

struct Eigenvalues {
  complex slow;  ///< larger real part
  complex fast;
  bool degenerate = false;
};

/// Relative eigenvalue gap below which the Jordan form is used.
inline constexpr double kDegenerateGap = 1e-9;

inline Eigenvalues eigenvalues(const Mat2& m) {
  const complex mean = m.trace() / 2.0;
  const complex half_diff = (m.m00 - m.m11) / 2.0;
  const complex s = std::sqrt(half_diff * half_diff + m.m01 * m.m10);
  complex l1 = mean + s;
  complex l2 = mean - s;
  if (l2.real() > l1.real()) std::swap(l1, l2);
  const double scale = std::max(std::abs(l1), std::abs(l2));
  const bool degenerate = std::abs(l1 - l2) <= kDegenerateGap * scale;
  return {l1, l2, degenerate};
}

/// Precomputed flow of v' = A v + b, evaluable at any t >= 0.
class AffineFlow {
 public:
  AffineFlow(const Mat2& a, const Vec2& b) : a_(a), eig_(eigenvalues(a)) {
    // A is nonsingular for the damped systems used here; the particular solution is -A^{-1} b.
    particular_ = Vec2{} - a.solve(b);
    if (eig_.degenerate) eig_.slow = eig_.fast = a.trace() / 2.0;
  }

  /// e^{At}
  Mat2 exp(double t) const {
    const complex l = eig_.slow;
    const complex el = std::exp(l * t);
    // e^{At} = e^{l t} [ I + (A - l I) t phi1((l2 - l) t) ];  Jordan limit when l2 == l.
    const complex c = eig_.degenerate ? complex(t) : t * phi1((eig_.fast - l) * t);
    const complex k = el * c;
    return {el + k * (a_.m00 - l), k * a_.m01, k * a_.m10, el + k * (a_.m11 - l)};
  }

  /// v(t) from v(0) = v0.
  Vec2 at(const Vec2& v0, double t) const {
    if (t == 0.0) return v0;
    return exp(t) * (v0 - particular_) + particular_;
  }

  const Vec2& steady_state() const { return particular_; }
  const Eigenvalues& spectrum() const { return eig_; }

 private:
  Mat2 a_;
  Eigenvalues eig_;
  Vec2 particular_;
};

}  // namespace omramsey::linalg
