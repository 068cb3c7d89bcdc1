#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "invlab/jet.hpp"
#include "invlab/types.hpp"

namespace invlab {

inline double value_of(double x) { return x; }
inline double value_of(const Jet& j) { return j.v; }

/// A real function on R^d with optional analytic first and second
/// derivatives. Used for test functions (phi, psi, tau) and for psi-flows.
struct ScalarFunction {
  std::string name;
  int dim = 2;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;

  double operator()(const Vec& x) const { return value(x); }
  bool has_gradient() const { return static_cast<bool>(gradient); }

  /// Gradient; throws ValidationError when none is available.
  Vec grad(const Vec& x) const;
  /// Hessian; central differences of the gradient (step 1e-5) when no
  /// analytic Hessian is attached.
  Mat hess(const Vec& x) const;
};

/// Wraps a generic callable `f(Point<T>) -> T` that is valid for both
/// `double` and `Jet`, yielding exact derivatives.
template <class F>
ScalarFunction from_generic(std::string name, int dim, F f) {
  ScalarFunction out;
  out.name = std::move(name);
  out.dim = dim;
  out.value = [f](const Vec& x) { return f(Point<double>{x[0], x[1]}); };
  out.gradient = [f](const Vec& x) { return f(jet_point(x)).g; };
  out.hessian = [f](const Vec& x) { return f(jet_point(x)).h; };
  return out;
}

/// exp(-1/t) for t > 0, else 0; the classical C-infinity building block.
template <class T>
T smooth_onset(const T& t) {
  if (value_of(t) <= 0.0) return T(0.0);
  using std::exp;
  return exp(-(T(1.0) / t));
}

/// Smooth step: 0 for t <= 0, 1 for t >= 1, C-infinity in between.
template <class T>
T smooth_step(const T& t) {
  if (value_of(t) <= 0.0) return T(0.0);
  if (value_of(t) >= 1.0) return T(1.0);
  const T a = smooth_onset(t);
  const T b = smooth_onset(T(1.0) - t);
  return a / (a + b);
}

/// Bump e * exp(-1/(1-s)) with s = |x-c|^2/r^2, normalised to peak value 1.
template <class T>
T bump_profile(const Point<T>& x, const Vec& centre, double radius, int dim) {
  T s(0.0);
  for (int k = 0; k < dim; ++k) {
    const T d = (x[k] - T(centre[k])) / T(radius);
    s += d * d;
  }
  if (value_of(s) >= 1.0) return T(0.0);
  using std::exp;
  return T(std::exp(1.0)) * exp(-(T(1.0) / (T(1.0) - s)));
}

/// Plateau window: 1 on `box`, 0 outside `box` grown by `margin` on every
/// side, smooth in between.
template <class T>
T plateau_window(const Point<T>& x, const Box& box, double margin) {
  T w(1.0);
  for (int k = 0; k < box.dim; ++k) {
    w *= smooth_step((x[k] - T(box.lo[k] - margin)) / T(margin));
    w *= smooth_step((T(box.hi[k] + margin) - x[k]) / T(margin));
  }
  return w;
}

/// Generic `f` times the plateau window, evaluated as one jet.
template <class F>
ScalarFunction windowed_generic(std::string name, int dim, F f, const Box& box, double margin) {
  return from_generic(std::move(name), dim,
                      [f, box, margin](const auto& x) { return f(x) * plateau_window(x, box, margin); });
}

namespace functions {

ScalarFunction coordinate(int dim, int k);
ScalarFunction constant(int dim, double c);
ScalarFunction bump(int dim, const Vec& centre, double radius);
/// Normalised Gaussian density with standard deviation `sigma`.
ScalarFunction gaussian(int dim, const Vec& centre, double sigma);
ScalarFunction window(const Box& box, double margin);
ScalarFunction product(const ScalarFunction& a, const ScalarFunction& b);
/// `f` multiplied by the plateau window of `box` grown by `margin`.
ScalarFunction windowed(const ScalarFunction& f, const Box& box, double margin);

/// Finite family of smooth functions standing in for "all compactly
/// supported psi": windowed coordinates, windowed x1*x2 (2-D), windowed
/// sin(x1) and one bump centred in `box`.
std::vector<ScalarFunction> psi_battery(const Box& box);

}  // namespace functions
}  // namespace invlab
