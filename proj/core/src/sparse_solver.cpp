#include "invlab/sparse_solver.hpp"

#include <cmath>
#include <optional>
#include <string>

#include <Eigen/SparseCholesky>

#include "invlab/types.hpp"

namespace invlab {

struct SpdSolver::Impl {
  SparseMatrix matrix;
  SolverOptions options;
  Eigen::VectorXd inverse_diagonal;
  std::optional<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>>> ldlt;

  Eigen::VectorXd precondition(const Eigen::VectorXd& r) const {
    if (ldlt) return ldlt->solve(r);
    return inverse_diagonal.cwiseProduct(r);
  }
};

SpdSolver::SpdSolver(const SparseMatrix& matrix, SolverOptions options) : impl_(std::make_unique<Impl>()) {
  if (matrix.rows() != matrix.cols()) throw ValidationError("solver matrix must be square");
  impl_->matrix = matrix;
  impl_->options = options;
  const Eigen::Index n = matrix.rows();
  const bool cholesky = options.preconditioner == Preconditioner::cholesky ||
                        (options.preconditioner == Preconditioner::automatic && n > options.cholesky_threshold);
  if (cholesky) {
    Eigen::SparseMatrix<double> col = matrix;
    impl_->ldlt.emplace(col);
    if (impl_->ldlt->info() != Eigen::Success) throw SolverError("Cholesky preconditioner factorisation failed");
  } else {
    impl_->inverse_diagonal = matrix.diagonal();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = impl_->inverse_diagonal[i];
      if (!(d > 0.0)) throw SolverError("matrix diagonal is not positive at row " + std::to_string(i));
      impl_->inverse_diagonal[i] = 1.0 / d;
    }
  }
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

bool SpdSolver::uses_cholesky() const { return impl_->ldlt.has_value(); }

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& rhs, const Eigen::VectorXd& guess, SolveStats* stats) const {
  const SparseMatrix& a = impl_->matrix;
  const Eigen::Index n = a.rows();
  if (rhs.size() != n) throw ValidationError("right-hand side has the wrong length");
  const double tol = impl_->options.relative_tolerance;
  const int cap = impl_->options.max_iterations > 0
                      ? impl_->options.max_iterations
                      : std::max(20, static_cast<int>(std::ceil(10.0 * std::sqrt(static_cast<double>(n)))));

  Eigen::VectorXd x = guess.size() == n ? guess : Eigen::VectorXd::Zero(n);
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) {
    if (stats) *stats = {0, 0.0};
    return Eigen::VectorXd::Zero(n);
  }

  Eigen::VectorXd r = rhs - a * x;
  Eigen::VectorXd z = impl_->precondition(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  Eigen::VectorXd ap(n);

  for (int it = 0; it <= cap; ++it) {
    if (r.norm() <= tol * bnorm) {
      // The recursive residual can drift; accept only on the true one.
      r = rhs - a * x;
      const double rel = r.norm() / bnorm;
      if (rel <= tol) {
        if (stats) *stats = {it, rel};
        return x;
      }
      z = impl_->precondition(r);
      p = z;
      rz = r.dot(z);
    }
    if (it == cap) break;
    ap.noalias() = a * p;
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) throw SolverError("conjugate gradients met a non-positive curvature direction");
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    z = impl_->precondition(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  const double rel = (rhs - a * x).norm() / bnorm;
  throw SolverError("conjugate gradients did not converge in " + std::to_string(cap) +
                    " iterations; relative residual " + std::to_string(rel));
}

}  // namespace invlab
