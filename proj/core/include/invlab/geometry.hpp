#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "invlab/coefficients.hpp"
#include "invlab/types.hpp"

namespace invlab {

/// Raised when boundary sampling cannot collect the requested number of
/// points.
class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Omega written as the region above a graph, {x1 > tau(x2)} in 2-D or
/// {x > tau} in 1-D (tau constant). Used by the cutoff construction.
struct GraphChart {
  std::function<double(double)> tau;
  /// sup |tau'|.
  double slope = 0.0;
};

struct DomainSpec {
  std::string id;
  std::map<std::string, double> params;
  std::string expr;
  std::vector<double> normal;
};

/// Open set Omega = {g < 0} with a bounding box containing its closure (or,
/// for unbounded Omega, the part of it the experiments look at).
class DomainGeometry {
 public:
  using ImplicitFn = std::function<double(const Vec&)>;
  using GradientFn = std::function<Vec(const Vec&)>;

  /// Without `grad`, the gradient of g comes from central differences.
  DomainGeometry(int dim, std::string name, ImplicitFn g, GradientFn grad, Box bounding_box,
                 std::optional<GraphChart> chart = std::nullopt);

  int dim() const { return dim_; }
  const std::string& name() const { return name_; }
  const Box& bounding_box() const { return box_; }
  const std::optional<GraphChart>& chart() const { return chart_; }

  double g(const Vec& x) const { return g_(x); }
  Vec grad_g(const Vec& x) const;
  bool contains(const Vec& x) const { return g_(x) < 0.0; }

  /// Same set described by s * g; normals are unchanged for s > 0.
  DomainGeometry rescaled(double s) const;

 private:
  int dim_;
  std::string name_;
  ImplicitFn g_;
  GradientFn grad_;
  Box box_;
  std::optional<GraphChart> chart_;
};

struct BoundarySample {
  Vec point{0.0, 0.0};
  Vec normal{0.0, 0.0};
  double weight = 0.0;
};

namespace domains {

/// {|x - centre|^2 - r^2 < 0} scaled by `scale`; bounding box is the
/// enclosing square.
DomainGeometry disc(double radius = 1.0, Vec centre = {0.0, 0.0}, double scale = 1.0);
/// (0, inf) in 1-D, g(x) = -x, bounding box [-extent, extent].
DomainGeometry halfline(double extent = 4.0);
/// {x . n < 0} for a nonzero 2-D vector n (outward normal), bounding box
/// [-extent, extent]^2.
DomainGeometry halfspace(Vec normal, double extent = 2.0);
/// Open axis-aligned box, g(x) = max_k max(lo_k - x_k, x_k - hi_k).
DomainGeometry box(const Box& b);
/// {max(|x1|, |x2|) < r}.
DomainGeometry sup_norm_square(double r = 1.0);
/// User implicit function by expression id: `ellipse` (semi-axes a, b) or
/// `annulus` (radii r_in, r_out).
DomainGeometry implicit(const std::string& expr, const std::map<std::string, double>& params);

}  // namespace domains

DomainGeometry make_domain(const DomainSpec& spec);

/// n boundary points from quasi-random box points projected onto {g = 0} by
/// damped Newton steps along grad g. Points near kinks of g and points failing
/// the outwardness test are discarded and replaced.
std::vector<BoundarySample> sample_boundary(const DomainGeometry& domain, std::size_t n, std::uint64_t seed);

struct FluxResidual {
  double max = 0.0;
  double mean = 0.0;
};

/// |C(x) n_x| over the samples: maximum and weighted mean.
FluxResidual zero_flux_residual(const CoefficientField& field, const DomainGeometry& domain,
                                const std::vector<BoundarySample>& samples);

}  // namespace invlab
