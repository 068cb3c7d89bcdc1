#pragma once

#include <cstdint>
#include <vector>

#include "invlab/coefficients.hpp"
#include "invlab/functions.hpp"
#include "invlab/geometry.hpp"
#include "invlab/grid.hpp"
#include "invlab/semigroup.hpp"

namespace invlab {

/// chi_n(t): 0 for t <= 1/n, log(t n)/log n on (1/n, 1), 1 for t >= 1.
double cutoff_profile(int n, double t);

struct CutoffEntry {
  int n = 0;
  /// h(psi_n phi).
  double value = 0.0;
  /// 2 h(phi).
  double two_h_phi = 0.0;
  /// 2 M1 (log n)^-1 |phi|_inf^2 |K'|, with M1 = M (1 + |grad tau|)^2.
  double envelope = 0.0;
  double bound = 0.0;
};

struct CutoffSettings {
  std::size_t lipschitz_samples = 4096;
  std::uint64_t seed = 0;
};

/// h(psi_n phi) for psi_n(x) = chi_n(x1 - tau(x')) along a domain that
/// carries a graph chart, compared with the bound components.
std::vector<CutoffEntry> cutoff_sequence(const CoefficientField& field, const DomainGeometry& domain,
                                         const Grid& grid, const ScalarFunction& phi, const std::vector<int>& n_list,
                                         CutoffSettings settings = {});

/// Discrete tau_n on a grid: weights on the square of offsets
/// [-r, r]^d cells, normalised to sum to one.
struct DiscreteKernel {
  int radius_cells = 0;
  std::vector<double> weights;
  /// Sum of n^d tau(n y) h^d before normalisation.
  double raw_sum = 0.0;
};

/// Smooth compactly supported profile with integral one, scaled as
/// tau_n(x) = n^d tau(n x / radius) / radius^d.
class Mollifier {
 public:
  /// `profile` must vanish for |x| >= 1; it is normalised numerically.
  Mollifier(int dim, ScalarFunction profile, double radius = 1.0);

  /// exp(-1/(1 - |x|^2)) on the unit ball, normalised.
  static Mollifier standard(int dim);

  int dim() const { return dim_; }
  double radius() const { return radius_; }
  /// Integral of the unnormalised profile.
  double normalisation() const { return norm_; }
  double operator()(const Vec& y) const;
  /// Integral of |d_k tau| |y| dy.
  double gradient_moment(int k) const { return moments_[k]; }

  /// Throws ValidationError when the support spans fewer than 8 cells or does
  /// not fit into the grid.
  DiscreteKernel discretise(const Grid& grid, int n) const;

 private:
  int dim_;
  ScalarFunction profile_;
  double radius_;
  double norm_ = 1.0;
  Vec moments_{0.0, 0.0};
};

/// Zero-padded discrete convolution tau_n * f. Large 2-D products go
/// through an FFT; the result agrees with convolve_direct to rounding.
GridFunction convolve(const Grid& grid, const DiscreteKernel& kernel, const GridFunction& f);
/// Scatter-add over the kernel square.
GridFunction convolve_direct(const Grid& grid, const DiscreteKernel& kernel, const GridFunction& f);

/// b . grad f with central differences.
GridFunction directional_derivative(const VectorField& vf, const Grid& grid, const GridFunction& f);

struct CommutatorEntry {
  int n = 0;
  /// |B_n phi|_2.
  double commutator = 0.0;
  double phi_norm = 0.0;
  /// M |phi|_2.
  double bound = 0.0;
  double ratio = 0.0;
  double kernel_sum = 0.0;
};

struct CommutatorSettings {
  std::size_t lipschitz_samples = 4096;
  std::uint64_t seed = 0;
};

/// sum_k (1 + int |d_k tau| |y| dy) |b_k|_{W^{1,inf}} over the grid box,
/// with sampled sup norms and Lipschitz constants.
double commutator_constant(const VectorField& vf, const Mollifier& mol, const Box& box,
                           CommutatorSettings settings = {});

/// B_n phi = Y(tau_n * phi) - tau_n * (Y phi) for each n.
std::vector<CommutatorEntry> mollifier_commutator(const VectorField& vf, const Mollifier& mol, const Grid& grid,
                                                  const GridFunction& phi, const std::vector<int>& n_list,
                                                  CommutatorSettings settings = {});

/// Central-difference matrix of Y_psi f = (C grad psi) . grad f.
SparseMatrix advection_matrix(const VectorField& vf, const Grid& grid);

struct AdjointDefect {
  /// With the full divergence of C grad psi.
  double full = 0.0;
  /// With only sum (d_k psi)(d_l c_kl), dropping the c_kl d_k d_l psi term.
  double first_order = 0.0;
};

/// max over a seeded battery of smooth bumps f of
/// |(A_Y^T + A_Y + diag(div b)) f| / |f|.
AdjointDefect adjoint_identity_check(const CoefficientField& field, const ScalarFunction& psi, const Grid& grid,
                                     std::uint64_t seed = 0, int battery = 4);

}  // namespace invlab
