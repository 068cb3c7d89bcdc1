#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "invlab/functions.hpp"
#include "invlab/types.hpp"

namespace invlab {

/// Names a coefficient family and its parameters, e.g. `delta_family` with
/// `{"delta": 0.6}` or `scalar_1d` with expression id `square`.
struct FieldSpec {
  std::string id;
  std::map<std::string, double> params;
  std::string expr;
};

/// Symmetric positive semidefinite matrix field x -> C(x) with first
/// derivatives. Immutable after construction.
class CoefficientField {
 public:
  using MatrixFn = std::function<Mat(const Vec&)>;
  using GradientFn = std::function<MatGrad(const Vec&)>;

  /// Built-in constructor: the field is trusted to be symmetric and PSD.
  CoefficientField(int dim, std::string name, MatrixFn eval, GradientFn grad);

  /// User-supplied field. Every evaluation is checked for symmetry (1e-14)
  /// and positive semidefiniteness (smallest eigenvalue >= -1e-12). Without
  /// `grad`, derivatives come from central differences with step 1e-6.
  static CoefficientField custom(int dim, std::string name, MatrixFn eval, GradientFn grad = {});

  int dim() const { return dim_; }
  const std::string& name() const { return name_; }
  bool validated() const { return validate_; }
  bool has_analytic_gradient() const { return static_cast<bool>(grad_); }

  Mat eval(const Vec& x) const;
  MatGrad grad(const Vec& x) const;
  Mat operator()(const Vec& x) const { return eval(x); }

 private:
  int dim_;
  std::string name_;
  MatrixFn eval_;
  GradientFn grad_;
  bool validate_ = false;
};

/// Throws ValidationError naming `x` if `c` is not finite, not symmetric or
/// not positive semidefinite.
void check_coefficient_matrix(const Mat& c, int dim, const Vec& x);

/// C(x) for finite x.
Mat eval_matrix(const CoefficientField& field, const Vec& x);

namespace fields {

CoefficientField identity(int dim);
CoefficientField zero(int dim);
/// a(x) I with a(x) = |1 - |x|^2/R^2|^power; power >= 1.
CoefficientField radial_disc(double power = 2.0, double radius = 1.0);
/// v v^T with v = (-x2, x1).
CoefficientField rotation();
/// One-dimensional c(x) = |x|^(2 delta) (1 + x^2)^(-delta); delta >= 1/2.
CoefficientField delta_family(double delta);
/// One-dimensional scalar field by expression id: square, abs, cosine, constant.
CoefficientField scalar_1d(const std::string& expr);

}  // namespace fields

/// Builds a built-in field from its config id and parameters.
CoefficientField make_field(const FieldSpec& spec);

enum class VectorFieldKind { row, psi, custom };

/// First-order flow generator b(x) with its divergence sum_k d_k b_k.
class VectorField {
 public:
  using VectorFn = std::function<Vec(const Vec&)>;
  using DivergenceFn = std::function<double(const Vec&)>;

  VectorField(int dim, VectorFieldKind kind, std::string label, VectorFn b, DivergenceFn div, int row = 0);

  static VectorField custom(int dim, std::string label, VectorFn b, DivergenceFn div);

  int dim() const { return dim_; }
  VectorFieldKind kind() const { return kind_; }
  /// 1-based row index for row fields, 0 otherwise.
  int row() const { return row_; }
  const std::string& label() const { return label_; }

  Vec eval(const Vec& x) const { return b_(x); }
  Vec operator()(const Vec& x) const { return b_(x); }
  double divergence(const Vec& x) const { return div_(x); }

 private:
  int dim_;
  VectorFieldKind kind_;
  std::string label_;
  VectorFn b_;
  DivergenceFn div_;
  int row_;
};

/// Row k (1-based) of C.
VectorField make_row_field(const CoefficientField& field, int k);
/// C grad(psi); psi must carry a gradient. The divergence uses the Hessian of
/// psi (finite differences when not analytic) and the gradient of C.
VectorField make_psi_field(const CoefficientField& field, const ScalarFunction& psi);

/// Largest sampled quotient dist(f(x), f(y)) / |x - y| over point pairs in
/// `box`: global pairs of consecutive Halton points plus local pairs at
/// separations 1e-1 ... 1e-4 of the box diameter. Deterministic in `seed`.
double sampled_lipschitz(const Box& box, std::size_t samples, std::uint64_t seed,
                         const std::function<double(const Vec&, const Vec&)>& value_distance);

/// Frobenius-norm Lipschitz proxy of C over `box`.
double lipschitz_estimate(const CoefficientField& field, const Box& box, std::size_t samples,
                          std::uint64_t seed = 0);

}  // namespace invlab
