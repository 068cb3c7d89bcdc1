#pragma once

#include <memory>

#include "invlab/coefficients.hpp"
#include "invlab/geometry.hpp"
#include "invlab/grid.hpp"
#include "invlab/sparse_solver.hpp"

namespace invlab {

/// Stiffness matrix A of -div(C grad) on a grid. A is stored without the
/// cell weight, so the discrete form is psi^T A phi h^d.
struct DiscreteOperator {
  Grid grid;
  SparseMatrix stiffness;
  /// h^d.
  double weight = 0.0;
};

/// Conservative second-order assembly. In 1-D the flux through each face
/// uses c at the face midpoint. In 2-D every dual cell (the square spanned
/// by four neighbouring nodes) contributes the local energy
///   c11/2 [(b-a)^2 + (d-c)^2]/h^2 + c22/2 [(c-a)^2 + (d-b)^2]/h^2
///   + c12/2 [(d-a)^2 - (b-c)^2]/h^2
/// with C taken at the cell centre, which is PSD whenever C(x) is. Ghost
/// nodes outside the box carry zero. A is symmetrised explicitly.
DiscreteOperator assemble(const CoefficientField& field, const Grid& grid);

/// psi^T A phi h^d.
double form_value(const DiscreteOperator& op, const GridFunction& phi, const GridFunction& psi);

/// Nodewise sum c_kl d_k psi d_l phi with central differences.
GridFunction carre_du_champ(const CoefficientField& field, const Grid& grid, const GridFunction& psi,
                            const GridFunction& phi);

enum class Scheme { backward_euler, crank_nicolson };

const char* scheme_name(Scheme scheme);

/// theta-scheme (I + theta dt A) u_{n+1} = (I - (1 - theta) dt A) u_n. The
/// mass weight h^d multiplies both sides and is cancelled. The solver is set
/// up once per (operator, dt, scheme) and warm-started from u_n.
class Evolver {
 public:
  Evolver(const DiscreteOperator& op, double dt, Scheme scheme, SolverOptions options = {});

  double dt() const { return dt_; }
  Scheme scheme() const { return scheme_; }
  int total_iterations() const { return iterations_; }

  GridFunction step(const GridFunction& u) const;
  GridFunction advance(GridFunction u, long long steps) const;

 private:
  double dt_;
  Scheme scheme_;
  SparseMatrix explicit_part_;
  SpdSolver solver_;
  mutable int iterations_ = 0;
};

/// Number of equal steps of size <= dt that reach t.
long long step_count(double t, double dt);

/// Semigroup at time t from phi0 with steps of size t / step_count(t, dt).
GridFunction evolve(const DiscreteOperator& op, const GridFunction& phi0, double t, double dt, Scheme scheme,
                    SolverOptions options = {});

struct SubmarkovReport {
  /// Magnitude of the most negative value of phi_t (0 if none).
  double positivity_violation = 0.0;
  double linf_growth = 0.0;
  double l1_growth = 0.0;
  /// |sum phi_t - sum phi0| h^d.
  double mass_drift = 0.0;
};

/// Backward Euler evolution of phi0 >= 0 and the submarkovian observables.
SubmarkovReport submarkov_report(const DiscreteOperator& op, const GridFunction& phi0, double t, double dt,
                                 SolverOptions options = {});

/// 1 at nodes inside the domain, 0 elsewhere.
GridFunction indicator(const Grid& grid, const DomainGeometry& domain);

struct LeakageResult {
  /// |1_{Omega^c} phi_t|_2.
  double absolute = 0.0;
  /// absolute / |phi_t|_2.
  double relative = 0.0;
  GridFunction state;
};

/// Evolves 1_Omega phi0 and measures what lies outside Omega at time t.
LeakageResult leakage_report(const DiscreteOperator& op, const DomainGeometry& domain, const GridFunction& phi0,
                             double t, double dt, Scheme scheme = Scheme::crank_nicolson, SolverOptions options = {});

double leakage(const DiscreteOperator& op, const DomainGeometry& domain, const GridFunction& phi0, double t,
               double dt, Scheme scheme = Scheme::crank_nicolson);

}  // namespace invlab
