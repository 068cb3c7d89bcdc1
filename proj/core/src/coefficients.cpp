#include "invlab/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "invlab/quasi_random.hpp"

namespace invlab {
namespace {

constexpr double kSymmetryTol = 1e-14;
constexpr double kPsdTol = 1e-12;
constexpr double kFdStep = 1e-6;

template <class T>
using MatT = std::array<std::array<T, kMaxDim>, kMaxDim>;

// Builds a trusted field from a generic matrix function valid for double and
// Jet arguments.
template <class F>
CoefficientField from_generic_matrix(int dim, std::string name, F f) {
  auto eval = [f](const Vec& x) {
    const MatT<double> m = f(Point<double>{x[0], x[1]});
    return Mat{Vec{m[0][0], m[0][1]}, Vec{m[1][0], m[1][1]}};
  };
  auto grad = [f, dim](const Vec& x) {
    const MatT<Jet> m = f(jet_point(x));
    MatGrad g{};
    for (int d = 0; d < dim; ++d) {
      for (int k = 0; k < dim; ++k) {
        for (int l = 0; l < dim; ++l) g[d][k][l] = m[k][l].g[d];
      }
    }
    return g;
  };
  return CoefficientField(dim, std::move(name), std::move(eval), std::move(grad));
}

bool finite(const Vec& x, int dim) {
  for (int k = 0; k < dim; ++k) {
    if (!std::isfinite(x[k])) return false;
  }
  return true;
}

}  // namespace

CoefficientField::CoefficientField(int dim, std::string name, MatrixFn eval, GradientFn grad)
    : dim_(dim), name_(std::move(name)), eval_(std::move(eval)), grad_(std::move(grad)) {
  if (dim_ < 1 || dim_ > kMaxDim) throw ValidationError("coefficient field dimension must be 1 or 2");
  if (!eval_) throw ValidationError("coefficient field '" + name_ + "' has no evaluator");
}

CoefficientField CoefficientField::custom(int dim, std::string name, MatrixFn eval, GradientFn grad) {
  CoefficientField f(dim, std::move(name), std::move(eval), std::move(grad));
  f.validate_ = true;
  return f;
}

void check_coefficient_matrix(const Mat& c, int dim, const Vec& x) {
  for (int k = 0; k < dim; ++k) {
    for (int l = 0; l < dim; ++l) {
      if (!std::isfinite(c[k][l])) {
        throw ValidationError("coefficient matrix is not finite at " + format_point(x, dim));
      }
    }
  }
  if (dim == 2 && std::fabs(c[0][1] - c[1][0]) > kSymmetryTol) {
    throw ValidationError("coefficient matrix is not symmetric at " + format_point(x, dim));
  }
  if (min_eigenvalue(c, dim) < -kPsdTol) {
    throw ValidationError("coefficient matrix is indefinite at " + format_point(x, dim));
  }
}

Mat CoefficientField::eval(const Vec& x) const {
  Mat c = eval_(x);
  if (validate_) check_coefficient_matrix(c, dim_, x);
  return c;
}

MatGrad CoefficientField::grad(const Vec& x) const {
  if (grad_) return grad_(x);
  MatGrad g{};
  for (int m = 0; m < dim_; ++m) {
    Vec xp = x;
    Vec xm = x;
    xp[m] += kFdStep;
    xm[m] -= kFdStep;
    const Mat cp = eval(xp);
    const Mat cm = eval(xm);
    for (int k = 0; k < dim_; ++k) {
      for (int l = 0; l < dim_; ++l) g[m][k][l] = (cp[k][l] - cm[k][l]) / (2.0 * kFdStep);
    }
  }
  return g;
}

Mat eval_matrix(const CoefficientField& field, const Vec& x) {
  if (!finite(x, field.dim())) throw ValidationError("evaluation point is not finite");
  return field.eval(x);
}

namespace fields {

CoefficientField identity(int dim) {
  return from_generic_matrix(dim, "identity", [dim](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    MatT<T> m{};
    m[0][0] = T(1.0);
    if (dim == 2) m[1][1] = T(1.0);
    return m;
  });
}

CoefficientField zero(int dim) {
  return from_generic_matrix(dim, "zero", [](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    return MatT<T>{};
  });
}

CoefficientField radial_disc(double power, double radius) {
  if (!(power >= 1.0)) throw ValidationError("radial_disc power must be >= 1 for Lipschitz coefficients");
  if (!(radius > 0.0)) throw ValidationError("radial_disc radius must be positive");
  return from_generic_matrix(2, "radial_disc", [power, radius](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    const T s = T(1.0) - (x[0] * x[0] + x[1] * x[1]) / T(radius * radius);
    const T a = pow_abs(s, power);
    MatT<T> m{};
    m[0][0] = a;
    m[1][1] = a;
    return m;
  });
}

CoefficientField rotation() {
  return from_generic_matrix(2, "rotation", [](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    const T v0 = -x[1];
    const T v1 = x[0];
    MatT<T> m{};
    m[0][0] = v0 * v0;
    m[0][1] = v0 * v1;
    m[1][0] = v0 * v1;
    m[1][1] = v1 * v1;
    return m;
  });
}

CoefficientField delta_family(double delta) {
  if (!(delta >= 0.5)) throw ValidationError("delta_family requires delta >= 1/2");
  return from_generic_matrix(1, "delta_family", [delta](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    using std::pow;
    const T c = pow_abs(x[0], 2.0 * delta) * pow(T(1.0) + x[0] * x[0], -delta);
    MatT<T> m{};
    m[0][0] = c;
    return m;
  });
}

CoefficientField scalar_1d(const std::string& expr) {
  if (expr == "square") {
    return from_generic_matrix(1, "scalar_1d:square", [](const auto& x) {
      using T = std::decay_t<decltype(x[0])>;
      MatT<T> m{};
      m[0][0] = x[0] * x[0];
      return m;
    });
  }
  if (expr == "abs") {
    return from_generic_matrix(1, "scalar_1d:abs", [](const auto& x) {
      using T = std::decay_t<decltype(x[0])>;
      MatT<T> m{};
      m[0][0] = pow_abs(x[0], 1.0);
      return m;
    });
  }
  if (expr == "cosine") {
    return from_generic_matrix(1, "scalar_1d:cosine", [](const auto& x) {
      using T = std::decay_t<decltype(x[0])>;
      using std::cos;
      MatT<T> m{};
      m[0][0] = T(1.0) + T(0.5) * cos(x[0]);
      return m;
    });
  }
  if (expr == "constant") {
    CoefficientField f = identity(1);
    return CoefficientField(1, "scalar_1d:constant", [f](const Vec& x) { return f.eval(x); },
                            [f](const Vec& x) { return f.grad(x); });
  }
  throw ValidationError("unknown scalar_1d expression id '" + expr + "'");
}

}  // namespace fields

CoefficientField make_field(const FieldSpec& spec) {
  auto param = [&](const std::string& key, double fallback) {
    auto it = spec.params.find(key);
    return it == spec.params.end() ? fallback : it->second;
  };
  if (spec.id == "identity") return fields::identity(static_cast<int>(param("dim", 2)));
  if (spec.id == "zero") return fields::zero(static_cast<int>(param("dim", 2)));
  if (spec.id == "radial_disc") return fields::radial_disc(param("power", 2.0), param("radius", 1.0));
  if (spec.id == "rotation") return fields::rotation();
  if (spec.id == "delta_family") {
    auto it = spec.params.find("delta");
    if (it == spec.params.end()) throw ValidationError("delta_family requires parameter 'delta'");
    return fields::delta_family(it->second);
  }
  if (spec.id == "scalar_1d") return fields::scalar_1d(spec.expr);
  throw ValidationError("unknown coefficient field id '" + spec.id + "'");
}

VectorField::VectorField(int dim, VectorFieldKind kind, std::string label, VectorFn b, DivergenceFn div,
                         int row)
    : dim_(dim), kind_(kind), label_(std::move(label)), b_(std::move(b)), div_(std::move(div)), row_(row) {
  if (!b_ || !div_) throw ValidationError("vector field '" + label_ + "' is incomplete");
}

VectorField VectorField::custom(int dim, std::string label, VectorFn b, DivergenceFn div) {
  return VectorField(dim, VectorFieldKind::custom, std::move(label), std::move(b), std::move(div));
}

VectorField make_row_field(const CoefficientField& field, int k) {
  const int dim = field.dim();
  if (k < 1 || k > dim) {
    throw ValidationError("row index " + std::to_string(k) + " out of range 1.." + std::to_string(dim));
  }
  const int r = k - 1;
  auto b = [field, r](const Vec& x) { return field.eval(x)[r]; };
  auto div = [field, r, dim](const Vec& x) {
    const MatGrad g = field.grad(x);
    double s = 0.0;
    for (int l = 0; l < dim; ++l) s += g[l][r][l];
    return s;
  };
  return VectorField(dim, VectorFieldKind::row, field.name() + ":row" + std::to_string(k), std::move(b),
                     std::move(div), k);
}

VectorField make_psi_field(const CoefficientField& field, const ScalarFunction& psi) {
  if (!psi.has_gradient()) throw ValidationError("psi '" + psi.name + "' has no gradient");
  const int dim = field.dim();
  auto b = [field, psi, dim](const Vec& x) { return mat_vec(field.eval(x), psi.grad(x), dim); };
  auto div = [field, psi, dim](const Vec& x) {
    const Mat c = field.eval(x);
    const MatGrad dc = field.grad(x);
    const Vec gp = psi.grad(x);
    const Mat hp = psi.hess(x);
    // d_l (sum_k d_k psi c_kl) = sum (d_l d_k psi) c_kl + (d_k psi)(d_l c_kl)
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
      for (int l = 0; l < dim; ++l) s += hp[l][k] * c[k][l] + gp[k] * dc[l][k][l];
    }
    return s;
  };
  return VectorField(dim, VectorFieldKind::psi, field.name() + ":psi:" + psi.name, std::move(b),
                     std::move(div));
}

double sampled_lipschitz(const Box& box, std::size_t samples, std::uint64_t seed,
                         const std::function<double(const Vec&, const Vec&)>& value_distance) {
  if (samples < 2) throw ValidationError("Lipschitz estimate needs at least two samples");
  if (box.degenerate()) throw ValidationError("Lipschitz estimate over a degenerate box");

  const int dim = box.dim;
  double diameter = 0.0;
  for (int k = 0; k < dim; ++k) diameter += box.side(k) * box.side(k);
  diameter = std::sqrt(diameter);

  HaltonSequence halton(dim, seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr double kScales[] = {1e-1, 1e-2, 1e-3, 1e-4};

  auto clamp_to_box = [&](Vec y) {
    for (int k = 0; k < dim; ++k) y[k] = std::clamp(y[k], box.lo[k], box.hi[k]);
    return y;
  };

  double best = 0.0;
  auto consider = [&](const Vec& x, const Vec& y) {
    const double dist = norm(x - y, dim);
    if (dist <= 0.0) return;
    best = std::max(best, value_distance(x, y) / dist);
  };

  Vec previous = box.from_unit(halton.next());
  for (std::size_t i = 1; i < samples; ++i) {
    const Vec x = box.from_unit(halton.next());
    consider(previous, x);
    for (double scale : kScales) {
      Vec u{normal(rng), dim == 2 ? normal(rng) : 0.0};
      const double len = norm(u, dim);
      if (len == 0.0) continue;
      consider(x, clamp_to_box(x + (scale * diameter / len) * u));
    }
    previous = x;
  }
  return best;
}

double lipschitz_estimate(const CoefficientField& field, const Box& box, std::size_t samples,
                          std::uint64_t seed) {
  if (box.dim != field.dim()) throw ValidationError("box and field dimensions differ");
  const int dim = field.dim();
  return sampled_lipschitz(box, samples, seed, [&](const Vec& x, const Vec& y) {
    const Mat cx = field.eval(x);
    const Mat cy = field.eval(y);
    Mat diff{};
    for (int k = 0; k < dim; ++k) {
      for (int l = 0; l < dim; ++l) diff[k][l] = cx[k][l] - cy[k][l];
    }
    return frobenius(diff, dim);
  });
}

}  // namespace invlab
