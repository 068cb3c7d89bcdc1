#include "invlab/semigroup.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace invlab {
namespace {

// 3x3 stencil per node, offset (di, dj) stored at (di + 1) + 3 (dj + 1).
class StencilAccumulator {
 public:
  explicit StencilAccumulator(const Grid& grid) : grid_(grid), stencil_(grid.size()) {
    for (auto& s : stencil_) s.fill(0.0);
  }

  // coef * (u_p - u_q)^2 with p, q given by multi-indices; nodes outside the
  // grid are zero ghosts.
  void pair(int pi, int pj, int qi, int qj, double coef) {
    const bool p_in = inside(pi, pj);
    const bool q_in = inside(qi, qj);
    if (p_in) stencil_[grid_.index(pi, pj)][4] += coef;
    if (q_in) stencil_[grid_.index(qi, qj)][4] += coef;
    if (p_in && q_in) {
      stencil_[grid_.index(pi, pj)][slot(qi - pi, qj - pj)] -= coef;
      stencil_[grid_.index(qi, qj)][slot(pi - qi, pj - qj)] -= coef;
    }
  }

  SparseMatrix build() const {
    const Eigen::Index n = grid_.size();
    const int stride = grid_.count(0);
    SparseMatrix a(n, n);
    a.reserve(Eigen::VectorXi::Constant(n, grid_.dim() == 1 ? 3 : 9));
    for (Eigen::Index p = 0; p < n; ++p) {
      const auto ij = grid_.multi_index(p);
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          const double v = stencil_[p][slot(di, dj)];
          if (di == 0 && dj == 0) {
            a.insert(p, p) = v;
          } else if (v != 0.0 && inside(ij[0] + di, ij[1] + dj)) {
            a.insert(p, p + di + static_cast<Eigen::Index>(stride) * dj) = v;
          }
        }
      }
    }
    a.makeCompressed();
    return a;
  }

 private:
  static int slot(int di, int dj) { return (di + 1) + 3 * (dj + 1); }

  bool inside(int i, int j) const {
    if (i < 0 || i >= grid_.count(0)) return false;
    if (grid_.dim() == 1) return j == 0;
    return j >= 0 && j < grid_.count(1);
  }

  const Grid& grid_;
  std::vector<std::array<double, 9>> stencil_;
};

void check_finite(const Mat& c, int dim, const Vec& x) {
  for (int k = 0; k < dim; ++k) {
    for (int l = 0; l < dim; ++l) {
      if (!std::isfinite(c[k][l])) throw ValidationError("NaN coefficient at " + format_point(x, dim));
    }
  }
}

// Central difference along `axis` with zero ghosts.
GridFunction central_difference(const Grid& grid, const GridFunction& f, int axis) {
  const double inv = 1.0 / (2.0 * grid.spacing());
  GridFunction out(grid.size());
  const int n0 = grid.count(0);
  const int n1 = grid.dim() == 2 ? grid.count(1) : 1;
  for (int j = 0; j < n1; ++j) {
    for (int i = 0; i < n0; ++i) {
      double up = 0.0;
      double down = 0.0;
      if (axis == 0) {
        if (i + 1 < n0) up = f[grid.index(i + 1, j)];
        if (i > 0) down = f[grid.index(i - 1, j)];
      } else {
        if (j + 1 < n1) up = f[grid.index(i, j + 1)];
        if (j > 0) down = f[grid.index(i, j - 1)];
      }
      out[grid.index(i, j)] = (up - down) * inv;
    }
  }
  return out;
}

}  // namespace

DiscreteOperator assemble(const CoefficientField& field, const Grid& grid) {
  if (field.dim() != grid.dim()) throw ValidationError("field and grid dimensions differ");
  const double h = grid.spacing();
  const double inv_h2 = 1.0 / (h * h);
  StencilAccumulator acc(grid);

  if (grid.dim() == 1) {
    for (int i = -1; i < grid.count(0); ++i) {
      const Vec x{grid.box().lo[0] + (i + 1) * h, 0.0};
      const Mat c = field.eval(x);
      check_finite(c, 1, x);
      acc.pair(i, 0, i + 1, 0, c[0][0] * inv_h2);
    }
  } else {
    for (int cj = -1; cj < grid.count(1); ++cj) {
      for (int ci = -1; ci < grid.count(0); ++ci) {
        const Vec x{grid.box().lo[0] + (ci + 1) * h, grid.box().lo[1] + (cj + 1) * h};
        const Mat c = field.eval(x);
        check_finite(c, 2, x);
        const double c11 = 0.5 * c[0][0] * inv_h2;
        const double c22 = 0.5 * c[1][1] * inv_h2;
        const double c12 = 0.25 * (c[0][1] + c[1][0]) * inv_h2;
        // corners a = (ci, cj), b = (ci+1, cj), c = (ci, cj+1), d = (ci+1, cj+1)
        acc.pair(ci, cj, ci + 1, cj, c11);
        acc.pair(ci, cj + 1, ci + 1, cj + 1, c11);
        acc.pair(ci, cj, ci, cj + 1, c22);
        acc.pair(ci + 1, cj, ci + 1, cj + 1, c22);
        if (c12 != 0.0) {
          acc.pair(ci, cj, ci + 1, cj + 1, c12);
          acc.pair(ci + 1, cj, ci, cj + 1, -c12);
        }
      }
    }
  }

  SparseMatrix a = acc.build();
  SparseMatrix at = a.transpose();
  SparseMatrix sym = 0.5 * (a + at);
  sym.prune(0.0);
  return DiscreteOperator{grid, std::move(sym), grid.weight()};
}

double form_value(const DiscreteOperator& op, const GridFunction& phi, const GridFunction& psi) {
  op.grid.check(phi, "form_value");
  op.grid.check(psi, "form_value");
  // Both orders, so swapping the arguments gives the same bits.
  return 0.5 * (psi.dot(op.stiffness * phi) + phi.dot(op.stiffness * psi)) * op.weight;
}

GridFunction carre_du_champ(const CoefficientField& field, const Grid& grid, const GridFunction& psi,
                            const GridFunction& phi) {
  if (field.dim() != grid.dim()) throw ValidationError("field and grid dimensions differ");
  grid.check(psi, "carre_du_champ");
  grid.check(phi, "carre_du_champ");
  const int dim = grid.dim();
  std::array<GridFunction, 2> dpsi;
  std::array<GridFunction, 2> dphi;
  for (int k = 0; k < dim; ++k) {
    dpsi[k] = central_difference(grid, psi, k);
    dphi[k] = central_difference(grid, phi, k);
  }
  GridFunction out(grid.size());
  for (Eigen::Index p = 0; p < grid.size(); ++p) {
    const Mat c = field.eval(grid.node(p));
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
      for (int l = 0; l < dim; ++l) s += c[k][l] * dpsi[k][p] * dphi[l][p];
    }
    out[p] = s;
  }
  return out;
}

const char* scheme_name(Scheme scheme) {
  return scheme == Scheme::backward_euler ? "backward_euler" : "crank_nicolson";
}

namespace {

double theta_of(Scheme scheme) { return scheme == Scheme::backward_euler ? 1.0 : 0.5; }

SparseMatrix shifted(const SparseMatrix& a, double s) {
  SparseMatrix id(a.rows(), a.cols());
  id.setIdentity();
  return id + s * a;
}

}  // namespace

Evolver::Evolver(const DiscreteOperator& op, double dt, Scheme scheme, SolverOptions options)
    : dt_(dt),
      scheme_(scheme),
      explicit_part_(shifted(op.stiffness, -(1.0 - theta_of(scheme)) * dt)),
      solver_((dt > 0.0 && std::isfinite(dt)) ? shifted(op.stiffness, theta_of(scheme) * dt)
                                              : throw ValidationError("time step must be positive"),
              options) {}

GridFunction Evolver::step(const GridFunction& u) const {
  SolveStats stats;
  GridFunction rhs = scheme_ == Scheme::backward_euler ? u : GridFunction(explicit_part_ * u);
  GridFunction next = solver_.solve(rhs, u, &stats);
  iterations_ += stats.iterations;
  return next;
}

GridFunction Evolver::advance(GridFunction u, long long steps) const {
  for (long long s = 0; s < steps; ++s) u = step(u);
  return u;
}

long long step_count(double t, double dt) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("evolution time must be positive");
  if (!(dt > 0.0) || dt > t * (1.0 + 1e-12)) throw ValidationError("time step must satisfy 0 < dt <= t");
  return std::max(1LL, static_cast<long long>(std::ceil(t / dt - 1e-9)));
}

GridFunction evolve(const DiscreteOperator& op, const GridFunction& phi0, double t, double dt, Scheme scheme,
                    SolverOptions options) {
  op.grid.check(phi0, "evolve");
  const long long steps = step_count(t, dt);
  Evolver ev(op, t / static_cast<double>(steps), scheme, options);
  return ev.advance(phi0, steps);
}

SubmarkovReport submarkov_report(const DiscreteOperator& op, const GridFunction& phi0, double t, double dt,
                                 SolverOptions options) {
  op.grid.check(phi0, "submarkov_report");
  if (phi0.minCoeff() < 0.0) throw ValidationError("submarkov_report needs a nonnegative initial state");
  const GridFunction phi = evolve(op, phi0, t, dt, Scheme::backward_euler, options);
  SubmarkovReport r;
  r.positivity_violation = std::max(0.0, -phi.minCoeff());
  const double linf0 = phi0.cwiseAbs().maxCoeff();
  const double l10 = phi0.cwiseAbs().sum();
  r.linf_growth = linf0 > 0.0 ? phi.cwiseAbs().maxCoeff() / linf0 : 0.0;
  r.l1_growth = l10 > 0.0 ? phi.cwiseAbs().sum() / l10 : 0.0;
  r.mass_drift = std::fabs(phi.sum() - phi0.sum()) * op.weight;
  return r;
}

GridFunction indicator(const Grid& grid, const DomainGeometry& domain) {
  if (grid.dim() != domain.dim()) throw ValidationError("grid and domain dimensions differ");
  return grid.sample([&](const Vec& x) { return domain.contains(x) ? 1.0 : 0.0; });
}

LeakageResult leakage_report(const DiscreteOperator& op, const DomainGeometry& domain, const GridFunction& phi0,
                             double t, double dt, Scheme scheme, SolverOptions options) {
  op.grid.check(phi0, "leakage");
  const GridFunction inside = indicator(op.grid, domain);
  LeakageResult r;
  r.state = evolve(op, phi0.cwiseProduct(inside), t, dt, scheme, options);
  const GridFunction outside = r.state.cwiseProduct(GridFunction::Ones(inside.size()) - inside);
  r.absolute = l2_norm(op.grid, outside);
  const double total = l2_norm(op.grid, r.state);
  r.relative = total > 0.0 ? r.absolute / total : 0.0;
  return r;
}

double leakage(const DiscreteOperator& op, const DomainGeometry& domain, const GridFunction& phi0, double t,
               double dt, Scheme scheme) {
  return leakage_report(op, domain, phi0, t, dt, scheme).absolute;
}

}  // namespace invlab
