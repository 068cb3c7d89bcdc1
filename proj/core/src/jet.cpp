#include "invlab/jet.hpp"

#include <sstream>

namespace invlab {

std::string format_point(const Vec& x, int dim) {
  std::ostringstream os;
  os.precision(17);
  os << '(' << x[0];
  if (dim > 1) os << ", " << x[1];
  os << ')';
  return os.str();
}

Jet& Jet::operator+=(const Jet& o) {
  v += o.v;
  for (int i = 0; i < kMaxDim; ++i) {
    g[i] += o.g[i];
    for (int j = 0; j < kMaxDim; ++j) h[i][j] += o.h[i][j];
  }
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  v -= o.v;
  for (int i = 0; i < kMaxDim; ++i) {
    g[i] -= o.g[i];
    for (int j = 0; j < kMaxDim; ++j) h[i][j] -= o.h[i][j];
  }
  return *this;
}

Jet& Jet::operator*=(const Jet& o) {
  *this = *this * o;
  return *this;
}

Jet& Jet::operator/=(const Jet& o) {
  *this = *this / o;
  return *this;
}

Jet chain(const Jet& a, double f, double d1, double d2) {
  Jet r(f);
  for (int i = 0; i < kMaxDim; ++i) {
    r.g[i] = d1 * a.g[i];
    for (int j = 0; j < kMaxDim; ++j) r.h[i][j] = d1 * a.h[i][j] + d2 * a.g[i] * a.g[j];
  }
  return r;
}

Jet operator-(const Jet& a) { return chain(a, -a.v, -1.0, 0.0); }

Jet operator+(Jet a, const Jet& b) { return a += b; }

Jet operator-(Jet a, const Jet& b) { return a -= b; }

Jet operator*(const Jet& a, const Jet& b) {
  Jet r(a.v * b.v);
  for (int i = 0; i < kMaxDim; ++i) {
    r.g[i] = a.g[i] * b.v + a.v * b.g[i];
    for (int j = 0; j < kMaxDim; ++j) {
      r.h[i][j] = a.h[i][j] * b.v + a.v * b.h[i][j] + a.g[i] * b.g[j] + b.g[i] * a.g[j];
    }
  }
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  const double inv = 1.0 / b.v;
  return a * chain(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}

Jet exp(const Jet& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}

Jet log(const Jet& a) { return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }

Jet sin(const Jet& a) {
  const double s = std::sin(a.v);
  return chain(a, s, std::cos(a.v), -s);
}

Jet cos(const Jet& a) {
  const double c = std::cos(a.v);
  return chain(a, c, -std::sin(a.v), -c);
}

Jet sqrt(const Jet& a) {
  const double s = std::sqrt(a.v);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

Jet pow_abs(const Jet& a, double p) {
  const double m = std::fabs(a.v);
  if (m == 0.0) {
    // |a| has no derivative at 0 for p == 1; report the symmetric value 0.
    const double d2 = (p == 2.0) ? 2.0 : 0.0;
    return chain(a, 0.0, 0.0, d2);
  }
  const double s = a.v > 0.0 ? 1.0 : -1.0;
  const double f = std::pow(m, p);
  const double d1 = s * p * std::pow(m, p - 1.0);
  const double d2 = p * (p - 1.0) * std::pow(m, p - 2.0);
  return chain(a, f, d1, d2);
}

Jet pow(const Jet& a, double p) {
  const double f = std::pow(a.v, p);
  return chain(a, f, p * std::pow(a.v, p - 1.0), p * (p - 1.0) * std::pow(a.v, p - 2.0));
}

}  // namespace invlab
