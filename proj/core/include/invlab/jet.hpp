#pragma once

#include <cmath>

#include "invlab/types.hpp"

namespace invlab {

/// Second-order forward-mode jet in two variables: value, gradient and
/// Hessian propagated together. Built-in fields and test functions are
/// written once as templates and evaluated on `double` for values or on
/// `Jet` for exact derivatives.
struct Jet {
  double v = 0.0;
  Vec g{0.0, 0.0};
  Mat h{Vec{0.0, 0.0}, Vec{0.0, 0.0}};

  Jet() = default;
  Jet(double value) : v(value) {}  // NOLINT(google-explicit-constructor)

  static Jet variable(double value, int k) {
    Jet j(value);
    j.g[k] = 1.0;
    return j;
  }

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);
};

/// Applies a scalar function with derivatives f'(a.v) = d1, f''(a.v) = d2.
Jet chain(const Jet& a, double f, double d1, double d2);

Jet operator-(const Jet& a);
Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);

Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet sqrt(const Jet& a);
/// |a|^p with p >= 1; derivatives use sign(a) and vanish at a == 0 where the
/// one-sided values disagree.
Jet pow_abs(const Jet& a, double p);
Jet pow(const Jet& a, double p);

inline double pow_abs(double a, double p) { return std::pow(std::fabs(a), p); }

template <class T>
using Point = std::array<T, kMaxDim>;

/// Seeds a point for jet evaluation.
inline Point<Jet> jet_point(const Vec& x) { return {Jet::variable(x[0], 0), Jet::variable(x[1], 1)}; }

}  // namespace invlab
