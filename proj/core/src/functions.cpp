#include "invlab/functions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace invlab {

Vec ScalarFunction::grad(const Vec& x) const {
  if (!gradient) throw ValidationError("function '" + name + "' has no gradient");
  return gradient(x);
}

Mat ScalarFunction::hess(const Vec& x) const {
  if (hessian) return hessian(x);
  constexpr double step = 1e-5;
  Mat h{};
  for (int m = 0; m < dim; ++m) {
    Vec xp = x;
    Vec xm = x;
    xp[m] += step;
    xm[m] -= step;
    const Vec gp = grad(xp);
    const Vec gm = grad(xm);
    for (int k = 0; k < dim; ++k) h[m][k] = (gp[k] - gm[k]) / (2.0 * step);
  }
  // Symmetrise; mixed partials agree up to the difference error.
  if (dim == 2) h[0][1] = h[1][0] = 0.5 * (h[0][1] + h[1][0]);
  return h;
}

namespace functions {

ScalarFunction coordinate(int dim, int k) {
  return from_generic("x" + std::to_string(k + 1), dim, [k](const auto& x) { return x[k]; });
}

ScalarFunction constant(int dim, double c) {
  return from_generic("const", dim, [c](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    return T(c);
  });
}

ScalarFunction bump(int dim, const Vec& centre, double radius) {
  return from_generic("bump", dim,
                      [centre, radius, dim](const auto& x) { return bump_profile(x, centre, radius, dim); });
}

ScalarFunction gaussian(int dim, const Vec& centre, double sigma) {
  const double norm = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.5 * dim);
  return from_generic("gaussian", dim, [centre, sigma, dim, norm](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    using std::exp;
    T s(0.0);
    for (int k = 0; k < dim; ++k) {
      const T d = x[k] - T(centre[k]);
      s += d * d;
    }
    return T(norm) * exp(-(s / T(2.0 * sigma * sigma)));
  });
}

ScalarFunction window(const Box& box, double margin) {
  return from_generic("window", box.dim,
                      [box, margin](const auto& x) { return plateau_window(x, box, margin); });
}

ScalarFunction product(const ScalarFunction& a, const ScalarFunction& b) {
  ScalarFunction out;
  out.name = a.name + "*" + b.name;
  out.dim = std::max(a.dim, b.dim);
  out.value = [a, b](const Vec& x) { return a.value(x) * b.value(x); };
  if (a.has_gradient() && b.has_gradient()) {
    out.gradient = [a, b](const Vec& x) {
      const double va = a.value(x);
      const double vb = b.value(x);
      const Vec ga = a.gradient(x);
      const Vec gb = b.gradient(x);
      return Vec{ga[0] * vb + va * gb[0], ga[1] * vb + va * gb[1]};
    };
    out.hessian = [a, b](const Vec& x) {
      const double va = a.value(x);
      const double vb = b.value(x);
      const Vec ga = a.gradient(x);
      const Vec gb = b.gradient(x);
      const Mat ha = a.hess(x);
      const Mat hb = b.hess(x);
      Mat h{};
      for (int i = 0; i < kMaxDim; ++i) {
        for (int j = 0; j < kMaxDim; ++j) {
          h[i][j] = ha[i][j] * vb + va * hb[i][j] + ga[i] * gb[j] + gb[i] * ga[j];
        }
      }
      return h;
    };
  }
  return out;
}

ScalarFunction windowed(const ScalarFunction& f, const Box& box, double margin) {
  ScalarFunction out = product(f, window(box, margin));
  out.name = f.name + "_windowed";
  return out;
}

std::vector<ScalarFunction> psi_battery(const Box& box) {
  const int dim = box.dim;
  double min_side = box.side(0);
  for (int k = 1; k < dim; ++k) min_side = std::min(min_side, box.side(k));
  const double margin = 0.25 * min_side;

  std::vector<ScalarFunction> out;
  for (int k = 0; k < dim; ++k) {
    out.push_back(windowed_generic("x" + std::to_string(k + 1) + "_windowed", dim,
                                   [k](const auto& x) { return x[k]; }, box, margin));
  }
  if (dim == 2) {
    out.push_back(windowed_generic("x1x2_windowed", 2, [](const auto& x) { return x[0] * x[1]; }, box, margin));
  }
  out.push_back(windowed_generic("sin_x1_windowed", dim,
                                 [](const auto& x) {
                                   using std::sin;
                                   return sin(x[0]);
                                 },
                                 box, margin));
  ScalarFunction b = bump(dim, box.centre(), 0.5 * min_side);
  b.name = "bump";
  out.push_back(b);
  return out;
}

}  // namespace functions
}  // namespace invlab
