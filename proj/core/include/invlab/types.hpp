#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace invlab {

// Points, vectors and matrices live in at most two dimensions. One-dimensional
// objects use the first component and leave the rest at zero.
inline constexpr int kMaxDim = 2;

using Vec = std::array<double, kMaxDim>;
using Mat = std::array<Vec, kMaxDim>;
/// `MatGrad[m][k][l]` holds the partial derivative d_m c_kl.
using MatGrad = std::array<Mat, kMaxDim>;

/// Raised when user input (coefficients, domains, configuration) violates a
/// documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when the characteristic ODE integrator cannot meet its tolerance.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an iterative linear solve fails to converge.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis-aligned box in `dim` dimensions.
struct Box {
  int dim = 2;
  Vec lo{0.0, 0.0};
  Vec hi{0.0, 0.0};

  double side(int k) const { return hi[k] - lo[k]; }
  Vec centre() const { return {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])}; }

  bool contains(const Vec& x) const {
    for (int k = 0; k < dim; ++k) {
      if (x[k] < lo[k] || x[k] > hi[k]) return false;
    }
    return true;
  }

  /// Box scaled about its centre by `factor`.
  Box inflated(double factor) const {
    Box out = *this;
    const Vec c = centre();
    for (int k = 0; k < dim; ++k) {
      out.lo[k] = c[k] - factor * (c[k] - lo[k]);
      out.hi[k] = c[k] + factor * (hi[k] - c[k]);
    }
    return out;
  }

  /// Maps a point of the unit cube onto the box.
  Vec from_unit(const Vec& u) const {
    Vec x{0.0, 0.0};
    for (int k = 0; k < dim; ++k) x[k] = lo[k] + u[k] * side(k);
    return x;
  }

  bool degenerate() const {
    for (int k = 0; k < dim; ++k) {
      if (!(hi[k] > lo[k])) return true;
    }
    return false;
  }

  bool operator==(const Box&) const = default;
};

inline double norm(const Vec& v, int dim = kMaxDim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s += v[k] * v[k];
  return std::sqrt(s);
}

inline double dot(const Vec& a, const Vec& b, int dim = kMaxDim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s += a[k] * b[k];
  return s;
}

inline Vec operator+(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec operator-(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec operator*(double s, const Vec& a) { return {s * a[0], s * a[1]}; }

inline Vec mat_vec(const Mat& m, const Vec& v, int dim) {
  Vec out{0.0, 0.0};
  for (int k = 0; k < dim; ++k) {
    for (int l = 0; l < dim; ++l) out[k] += m[k][l] * v[l];
  }
  return out;
}

inline double frobenius(const Mat& m, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) {
    for (int l = 0; l < dim; ++l) s += m[k][l] * m[k][l];
  }
  return std::sqrt(s);
}

/// Smallest eigenvalue of the symmetric part of a 1x1 or 2x2 matrix.
inline double min_eigenvalue(const Mat& m, int dim) {
  if (dim == 1) return m[0][0];
  const double a = m[0][0];
  const double d = m[1][1];
  const double b = 0.5 * (m[0][1] + m[1][0]);
  const double mean = 0.5 * (a + d);
  const double radius = std::hypot(0.5 * (a - d), b);
  return mean - radius;
}

std::string format_point(const Vec& x, int dim);

}  // namespace invlab
