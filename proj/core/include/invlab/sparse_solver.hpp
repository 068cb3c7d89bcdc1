#pragma once

#include <cstddef>
#include <memory>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace invlab {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class Preconditioner { automatic, jacobi, cholesky };

struct SolverOptions {
  double relative_tolerance = 1e-12;
  /// 0 means 10 * sqrt(n).
  int max_iterations = 0;
  Preconditioner preconditioner = Preconditioner::automatic;
  /// `automatic` switches from Jacobi to a sparse Cholesky preconditioner
  /// above this many unknowns.
  Eigen::Index cholesky_threshold = 40000;
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Preconditioned conjugate gradients for a fixed symmetric positive
/// definite matrix. Convergence is judged on the true residual.
class SpdSolver {
 public:
  SpdSolver(const SparseMatrix& matrix, SolverOptions options = {});
  ~SpdSolver();
  SpdSolver(SpdSolver&&) noexcept;
  SpdSolver& operator=(SpdSolver&&) noexcept;

  /// Solves with `guess` as the starting vector (zero when empty). Throws
  /// SolverError when the iteration cap is reached.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, const Eigen::VectorXd& guess = {},
                        SolveStats* stats = nullptr) const;

  bool uses_cholesky() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace invlab
