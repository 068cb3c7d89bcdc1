#include "invlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <string>

#include "invlab/quasi_random.hpp"

#include <unsupported/Eigen/FFT>

namespace invlab {

double cutoff_profile(int n, double t) {
  if (n < 2) throw ValidationError("cutoff index must be at least 2");
  const double nd = static_cast<double>(n);
  if (t <= 1.0 / nd) return 0.0;
  if (t >= 1.0) return 1.0;
  return std::log(t * nd) / std::log(nd);
}

std::vector<CutoffEntry> cutoff_sequence(const CoefficientField& field, const DomainGeometry& domain,
                                         const Grid& grid, const ScalarFunction& phi, const std::vector<int>& n_list,
                                         CutoffSettings settings) {
  if (!domain.chart()) throw ValidationError("domain '" + domain.name() + "' is not graph-representable");
  if (field.dim() != grid.dim() || domain.dim() != grid.dim()) throw ValidationError("dimension mismatch");
  const GraphChart& chart = *domain.chart();
  const int dim = grid.dim();

  const DiscreteOperator op = assemble(field, grid);
  const GridFunction u = grid.sample(phi.value);
  const double two_h_phi = 2.0 * form_value(op, u, u);
  const double sup_phi = u.cwiseAbs().maxCoeff();

  double slab = 1.0;  // |K'|: a point in 1-D, the x2-extent of supp phi in 2-D
  if (dim == 2) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Eigen::Index p = 0; p < grid.size(); ++p) {
      if (u[p] != 0.0) {
        lo = std::min(lo, grid.node(p)[1]);
        hi = std::max(hi, grid.node(p)[1]);
      }
    }
    slab = hi >= lo ? hi - lo + grid.spacing() : 0.0;
  }
  const double m = lipschitz_estimate(field, grid.box(), settings.lipschitz_samples, settings.seed);
  const double m1 = m * (1.0 + chart.slope) * (1.0 + chart.slope);

  std::vector<CutoffEntry> out;
  out.reserve(n_list.size());
  for (int n : n_list) {
    const GridFunction cut = grid.sample([&](const Vec& x) {
      const double offset = dim == 1 ? x[0] - chart.tau(0.0) : x[0] - chart.tau(x[1]);
      return cutoff_profile(n, offset) * phi(x);
    });
    CutoffEntry e;
    e.n = n;
    e.value = form_value(op, cut, cut);
    e.two_h_phi = two_h_phi;
    e.envelope = 2.0 * m1 / std::log(static_cast<double>(n)) * sup_phi * sup_phi * slab;
    e.bound = e.two_h_phi + e.envelope;
    out.push_back(e);
  }
  return out;
}

namespace {

// Midpoint rule over [-1, 1]^dim.
template <class F>
double cube_quadrature(int dim, int cells, F f) {
  const double h = 2.0 / cells;
  double s = 0.0;
  if (dim == 1) {
    for (int i = 0; i < cells; ++i) s += f(Vec{-1.0 + (i + 0.5) * h, 0.0});
    return s * h;
  }
  for (int j = 0; j < cells; ++j) {
    for (int i = 0; i < cells; ++i) s += f(Vec{-1.0 + (i + 0.5) * h, -1.0 + (j + 0.5) * h});
  }
  return s * h * h;
}

}  // namespace

Mollifier::Mollifier(int dim, ScalarFunction profile, double radius)
    : dim_(dim), profile_(std::move(profile)), radius_(radius) {
  if (dim_ < 1 || dim_ > kMaxDim) throw ValidationError("mollifier dimension must be 1 or 2");
  if (!(radius_ > 0.0)) throw ValidationError("mollifier radius must be positive");
  if (!profile_.has_gradient()) throw ValidationError("mollifier profile needs a gradient");
  const int cells = dim_ == 1 ? 20000 : 600;
  norm_ = cube_quadrature(dim_, cells, [&](const Vec& z) { return profile_(z); });
  if (!(norm_ > 0.0)) throw ValidationError("mollifier profile has no mass");
  for (int k = 0; k < dim_; ++k) {
    moments_[k] = cube_quadrature(dim_, cells, [&](const Vec& z) {
                    return std::fabs(profile_.grad(z)[k]) * norm(z, dim_);
                  }) /
                  norm_;
  }
}

Mollifier Mollifier::standard(int dim) {
  ScalarFunction profile = from_generic("standard_bump", dim, [dim](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    T s(0.0);
    for (int k = 0; k < dim; ++k) s += x[k] * x[k];
    if (value_of(s) >= 1.0) return T(0.0);
    using std::exp;
    return exp(-(T(1.0) / (T(1.0) - s)));
  });
  return Mollifier(dim, std::move(profile), 1.0);
}

double Mollifier::operator()(const Vec& y) const {
  const Vec z = (1.0 / radius_) * y;
  return profile_(z) / (norm_ * std::pow(radius_, dim_));
}

DiscreteKernel Mollifier::discretise(const Grid& grid, int n) const {
  if (grid.dim() != dim_) throw ValidationError("mollifier and grid dimensions differ");
  if (n < 1) throw ValidationError("mollifier index must be positive");
  const double h = grid.spacing();
  const double support = radius_ / n;
  if (2.0 * support / h < 8.0) {
    throw ValidationError("support violation: tau_" + std::to_string(n) + " spans " +
                          std::to_string(2.0 * support / h) + " cells, need at least 8");
  }
  DiscreteKernel k;
  k.radius_cells = static_cast<int>(std::floor(support / h));
  for (int axis = 0; axis < dim_; ++axis) {
    if (2 * k.radius_cells + 1 > grid.count(axis)) {
      throw ValidationError("support violation: tau_" + std::to_string(n) + " does not fit into the grid");
    }
  }
  const int r = k.radius_cells;
  const int width = 2 * r + 1;
  const double scale = std::pow(static_cast<double>(n), dim_) * grid.weight();
  k.weights.assign(dim_ == 1 ? width : width * width, 0.0);
  double sum = 0.0;
  for (int j = (dim_ == 1 ? 0 : -r); j <= (dim_ == 1 ? 0 : r); ++j) {
    for (int i = -r; i <= r; ++i) {
      const Vec y{n * i * h, n * j * h};
      const double w = scale * (*this)(y);
      k.weights[(i + r) + (dim_ == 1 ? 0 : width * (j + r))] = w;
      sum += w;
    }
  }
  k.raw_sum = sum;
  for (double& w : k.weights) w /= sum;
  return k;
}

namespace {

// Smallest 2^a 3^b 5^c at or above n.
int fft_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int k = m;
    for (int p : {2, 3, 5}) {
      while (k % p == 0) k /= p;
    }
    if (k == 1) return m;
  }
}

// In-place 2-D transform of a row-major nx by ny array (x fastest).
void fft2(std::vector<std::complex<double>>& a, int nx, int ny, bool inverse) {
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> in;
  std::vector<std::complex<double>> out;
  in.resize(nx);
  for (int j = 0; j < ny; ++j) {
    std::copy(a.begin() + static_cast<std::ptrdiff_t>(j) * nx, a.begin() + static_cast<std::ptrdiff_t>(j + 1) * nx,
              in.begin());
    inverse ? fft.inv(out, in) : fft.fwd(out, in);
    std::copy(out.begin(), out.end(), a.begin() + static_cast<std::ptrdiff_t>(j) * nx);
  }
  in.resize(ny);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) in[j] = a[static_cast<std::size_t>(j) * nx + i];
    inverse ? fft.inv(out, in) : fft.fwd(out, in);
    for (int j = 0; j < ny; ++j) a[static_cast<std::size_t>(j) * nx + i] = out[j];
  }
}

// Zero padding to at least n + r per axis keeps the circular product
// equal to the linear convolution on the grid.
GridFunction convolve_fft(const Grid& grid, const DiscreteKernel& kernel, const GridFunction& f) {
  const int r = kernel.radius_cells;
  const int width = 2 * r + 1;
  const int n0 = grid.count(0);
  const int n1 = grid.count(1);
  const int px = fft_size(n0 + r);
  const int py = fft_size(n1 + r);
  const std::size_t total = static_cast<std::size_t>(px) * py;
  std::vector<std::complex<double>> a(total);
  std::vector<std::complex<double>> w(total);
  for (int j = 0; j < n1; ++j) {
    for (int i = 0; i < n0; ++i) a[static_cast<std::size_t>(j) * px + i] = f[grid.index(i, j)];
  }
  for (int dj = -r; dj <= r; ++dj) {
    for (int di = -r; di <= r; ++di) {
      const int i = (di + px) % px;
      const int j = (dj + py) % py;
      w[static_cast<std::size_t>(j) * px + i] = kernel.weights[static_cast<std::size_t>(width) * (dj + r) + (di + r)];
    }
  }
  fft2(a, px, py, false);
  fft2(w, px, py, false);
  for (std::size_t k = 0; k < total; ++k) a[k] *= w[k];
  fft2(a, px, py, true);
  GridFunction out(grid.size());
  for (int j = 0; j < n1; ++j) {
    for (int i = 0; i < n0; ++i) out[grid.index(i, j)] = a[static_cast<std::size_t>(j) * px + i].real();
  }
  return out;
}

// Above this many multiply-adds the 2-D product goes through the FFT.
constexpr double kDirectWork = 5e7;

}  // namespace

GridFunction convolve(const Grid& grid, const DiscreteKernel& kernel, const GridFunction& f) {
  grid.check(f, "convolve");
  if (grid.dim() == 2) {
    const double width = 2.0 * kernel.radius_cells + 1.0;
    const double support = static_cast<double>((f.array() != 0.0).count());
    if (support * width * width > kDirectWork) return convolve_fft(grid, kernel, f);
  }
  return convolve_direct(grid, kernel, f);
}

GridFunction convolve_direct(const Grid& grid, const DiscreteKernel& kernel, const GridFunction& f) {
  grid.check(f, "convolve");
  const int r = kernel.radius_cells;
  const int width = 2 * r + 1;
  const int n0 = grid.count(0);
  const int n1 = grid.dim() == 2 ? grid.count(1) : 1;
  const int rj = grid.dim() == 2 ? r : 0;
  GridFunction out = GridFunction::Zero(grid.size());
  for (Eigen::Index p = 0; p < grid.size(); ++p) {
    const double v = f[p];
    if (v == 0.0) continue;
    const auto ij = grid.multi_index(p);
    for (int dj = -rj; dj <= rj; ++dj) {
      const int j = ij[1] + dj;
      if (j < 0 || j >= n1) continue;
      const double* row = kernel.weights.data() + (grid.dim() == 2 ? width * (dj + r) : 0);
      for (int di = -r; di <= r; ++di) {
        const int i = ij[0] + di;
        if (i < 0 || i >= n0) continue;
        out[grid.index(i, j)] += row[di + r] * v;
      }
    }
  }
  return out;
}

SparseMatrix advection_matrix(const VectorField& vf, const Grid& grid) {
  if (vf.dim() != grid.dim()) throw ValidationError("vector field and grid dimensions differ");
  const int dim = grid.dim();
  const double inv = 1.0 / (2.0 * grid.spacing());
  const int n0 = grid.count(0);
  const int n1 = dim == 2 ? grid.count(1) : 1;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(grid.size()) * 2 * dim);
  for (Eigen::Index p = 0; p < grid.size(); ++p) {
    const auto ij = grid.multi_index(p);
    const Vec b = vf(grid.node(p));
    if (ij[0] + 1 < n0) triplets.emplace_back(p, grid.index(ij[0] + 1, ij[1]), b[0] * inv);
    if (ij[0] > 0) triplets.emplace_back(p, grid.index(ij[0] - 1, ij[1]), -b[0] * inv);
    if (dim == 2) {
      if (ij[1] + 1 < n1) triplets.emplace_back(p, grid.index(ij[0], ij[1] + 1), b[1] * inv);
      if (ij[1] > 0) triplets.emplace_back(p, grid.index(ij[0], ij[1] - 1), -b[1] * inv);
    }
  }
  SparseMatrix a(grid.size(), grid.size());
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

GridFunction directional_derivative(const VectorField& vf, const Grid& grid, const GridFunction& f) {
  grid.check(f, "directional_derivative");
  return advection_matrix(vf, grid) * f;
}

double commutator_constant(const VectorField& vf, const Mollifier& mol, const Box& box, CommutatorSettings settings) {
  const int dim = vf.dim();
  double m = 0.0;
  HaltonSequence halton(dim, settings.seed);
  Vec sup{0.0, 0.0};
  for (std::size_t i = 0; i < settings.lipschitz_samples; ++i) {
    const Vec b = vf(box.from_unit(halton.next()));
    for (int k = 0; k < dim; ++k) sup[k] = std::max(sup[k], std::fabs(b[k]));
  }
  for (int k = 0; k < dim; ++k) {
    const double lip = sampled_lipschitz(box, settings.lipschitz_samples, settings.seed,
                                         [&](const Vec& x, const Vec& y) { return std::fabs(vf(x)[k] - vf(y)[k]); });
    m += (1.0 + mol.gradient_moment(k)) * (sup[k] + lip);
  }
  return m;
}

std::vector<CommutatorEntry> mollifier_commutator(const VectorField& vf, const Mollifier& mol, const Grid& grid,
                                                  const GridFunction& phi, const std::vector<int>& n_list,
                                                  CommutatorSettings settings) {
  grid.check(phi, "mollifier_commutator");
  if (vf.dim() != grid.dim() || mol.dim() != grid.dim()) throw ValidationError("dimension mismatch");
  const SparseMatrix y = advection_matrix(vf, grid);
  const GridFunction y_phi = y * phi;
  const double phi_norm = l2_norm(grid, phi);
  const double m = commutator_constant(vf, mol, grid.box(), settings);

  std::vector<CommutatorEntry> out;
  out.reserve(n_list.size());
  for (int n : n_list) {
    const DiscreteKernel kernel = mol.discretise(grid, n);
    const GridFunction b_n = y * convolve(grid, kernel, phi) - convolve(grid, kernel, y_phi);
    CommutatorEntry e;
    e.n = n;
    e.commutator = l2_norm(grid, b_n);
    e.phi_norm = phi_norm;
    e.bound = m * phi_norm;
    e.ratio = e.bound > 0.0 ? e.commutator / e.bound : 0.0;
    double sum = 0.0;
    for (double w : kernel.weights) sum += w;
    e.kernel_sum = sum;
    out.push_back(e);
  }
  return out;
}

AdjointDefect adjoint_identity_check(const CoefficientField& field, const ScalarFunction& psi, const Grid& grid,
                                     std::uint64_t seed, int battery) {
  if (field.dim() != grid.dim()) throw ValidationError("field and grid dimensions differ");
  if (battery < 1) throw ValidationError("adjoint check needs at least one test function");
  const int dim = grid.dim();
  const VectorField vf = make_psi_field(field, psi);
  const SparseMatrix a = advection_matrix(vf, grid);
  const SparseMatrix at = a.transpose();
  const SparseMatrix skew = at + a;

  GridFunction div_full(grid.size());
  GridFunction div_first(grid.size());
  for (Eigen::Index p = 0; p < grid.size(); ++p) {
    const Vec x = grid.node(p);
    div_full[p] = vf.divergence(x);
    const MatGrad dc = field.grad(x);
    const Vec gp = psi.grad(x);
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
      for (int l = 0; l < dim; ++l) s += gp[k] * dc[l][k][l];
    }
    div_first[p] = s;
  }

  const Box& box = grid.box();
  double min_side = box.side(0);
  for (int k = 1; k < dim; ++k) min_side = std::min(min_side, box.side(k));
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.25, 0.75);

  AdjointDefect d;
  for (int b = 0; b < battery; ++b) {
    Vec centre{0.0, 0.0};
    for (int k = 0; k < dim; ++k) centre[k] = box.lo[k] + unit(rng) * box.side(k);
    const ScalarFunction f = functions::bump(dim, centre, 0.2 * min_side);
    const GridFunction u = grid.sample(f.value);
    const double un = u.norm();
    if (un == 0.0) continue;
    const GridFunction base = skew * u;
    d.full = std::max(d.full, (base + div_full.cwiseProduct(u)).norm() / un);
    d.first_order = std::max(d.first_order, (base + div_first.cwiseProduct(u)).norm() / un);
  }
  return d;
}

}  // namespace invlab
