#include "invlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "invlab/functions.hpp"
#include "invlab/quasi_random.hpp"

namespace invlab {
namespace {

constexpr double kProjectionTol = 1e-10;
constexpr int kNewtonIterations = 100;
constexpr double kKinkBracket = 1e-8;
constexpr double kKinkJump = 1e-6;
constexpr double kOutwardStep = 1e-4;
constexpr std::size_t kAttemptFactor = 50;

template <class T>
T larger(const T& a, const T& b) {
  return value_of(a) >= value_of(b) ? a : b;
}

template <class F>
DomainGeometry from_generic_implicit(int dim, std::string name, F f, Box box,
                                     std::optional<GraphChart> chart = std::nullopt) {
  auto g = [f](const Vec& x) { return f(Point<double>{x[0], x[1]}); };
  auto grad = [f](const Vec& x) { return f(jet_point(x)).g; };
  return DomainGeometry(dim, std::move(name), std::move(g), std::move(grad), box, std::move(chart));
}

Box square_box(double half, Vec centre = {0.0, 0.0}) {
  return Box{2, {centre[0] - half, centre[1] - half}, {centre[0] + half, centre[1] + half}};
}

}  // namespace

DomainGeometry::DomainGeometry(int dim, std::string name, ImplicitFn g, GradientFn grad, Box bounding_box,
                               std::optional<GraphChart> chart)
    : dim_(dim),
      name_(std::move(name)),
      g_(std::move(g)),
      grad_(std::move(grad)),
      box_(bounding_box),
      chart_(std::move(chart)) {
  if (dim_ < 1 || dim_ > kMaxDim) throw ValidationError("domain dimension must be 1 or 2");
  if (!g_) throw ValidationError("domain '" + name_ + "' has no implicit function");
  if (box_.dim != dim_ || box_.degenerate()) throw ValidationError("domain '" + name_ + "' has a bad bounding box");
}

Vec DomainGeometry::grad_g(const Vec& x) const {
  if (grad_) return grad_(x);
  constexpr double step = 1e-7;
  Vec out{0.0, 0.0};
  for (int k = 0; k < dim_; ++k) {
    Vec xp = x;
    Vec xm = x;
    xp[k] += step;
    xm[k] -= step;
    out[k] = (g_(xp) - g_(xm)) / (2.0 * step);
  }
  return out;
}

DomainGeometry DomainGeometry::rescaled(double s) const {
  if (!(s > 0.0)) throw ValidationError("rescaling factor must be positive");
  ImplicitFn g = [g = g_, s](const Vec& x) { return s * g(x); };
  GradientFn grad;
  if (grad_) grad = [d = grad_, s](const Vec& x) { return s * d(x); };
  return DomainGeometry(dim_, name_, std::move(g), std::move(grad), box_, chart_);
}

namespace domains {

DomainGeometry disc(double radius, Vec centre, double scale) {
  if (!(radius > 0.0)) throw ValidationError("disc radius must be positive");
  if (!(scale > 0.0)) throw ValidationError("disc scale must be positive");
  return from_generic_implicit(
      2, "disc",
      [radius, centre, scale](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        const T dx = x[0] - T(centre[0]);
        const T dy = x[1] - T(centre[1]);
        return T(scale) * (dx * dx + dy * dy - T(radius * radius));
      },
      square_box(radius, centre));
}

DomainGeometry halfline(double extent) {
  if (!(extent > 0.0)) throw ValidationError("halfline extent must be positive");
  GraphChart chart{[](double) { return 0.0; }, 0.0};
  return from_generic_implicit(
      1, "halfline", [](const auto& x) { return -x[0]; }, Box{1, {-extent, 0.0}, {extent, 0.0}}, chart);
}

DomainGeometry halfspace(Vec normal, double extent) {
  const double len = norm(normal);
  if (!(len > 0.0) || !std::isfinite(len)) throw ValidationError("halfspace normal must be a nonzero vector");
  if (!(extent > 0.0)) throw ValidationError("halfspace extent must be positive");
  const Vec n = (1.0 / len) * normal;
  std::optional<GraphChart> chart;
  if (n[0] < 0.0) {
    const double slope = -n[1] / n[0];
    chart = GraphChart{[slope](double x2) { return slope * x2; }, std::fabs(slope)};
  }
  return from_generic_implicit(
      2, "halfspace",
      [n](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        return T(n[0]) * x[0] + T(n[1]) * x[1];
      },
      square_box(extent), chart);
}

DomainGeometry box(const Box& b) {
  if (b.degenerate()) throw ValidationError("box domain is degenerate");
  Box bounds = b;
  std::optional<GraphChart> chart;
  return from_generic_implicit(
      b.dim, "box",
      [b](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        T g = T(b.lo[0]) - x[0];
        g = larger(g, x[0] - T(b.hi[0]));
        for (int k = 1; k < b.dim; ++k) {
          g = larger(g, T(b.lo[k]) - x[k]);
          g = larger(g, x[k] - T(b.hi[k]));
        }
        return g;
      },
      bounds, chart);
}

DomainGeometry sup_norm_square(double r) {
  if (!(r > 0.0)) throw ValidationError("square half-width must be positive");
  return from_generic_implicit(
      2, "sup_norm_square",
      [r](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        return larger(pow_abs(x[0], 1.0), pow_abs(x[1], 1.0)) - T(r);
      },
      square_box(r));
}

DomainGeometry implicit(const std::string& expr, const std::map<std::string, double>& params) {
  auto param = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  if (expr == "ellipse") {
    const double a = param("a", 2.0);
    const double b = param("b", 1.0);
    if (!(a > 0.0 && b > 0.0)) throw ValidationError("ellipse semi-axes must be positive");
    return from_generic_implicit(
        2, "implicit:ellipse",
        [a, b](const auto& x) {
          using T = std::decay_t<decltype(x[0])>;
          return x[0] * x[0] / T(a * a) + x[1] * x[1] / T(b * b) - T(1.0);
        },
        Box{2, {-a, -b}, {a, b}});
  }
  if (expr == "annulus") {
    const double r_in = param("r_in", 0.5);
    const double r_out = param("r_out", 1.0);
    if (!(r_in > 0.0 && r_out > r_in)) throw ValidationError("annulus needs 0 < r_in < r_out");
    // (r^2 - r_in^2)(r^2 - r_out^2) < 0 between the circles.
    return from_generic_implicit(
        2, "implicit:annulus",
        [r_in, r_out](const auto& x) {
          using T = std::decay_t<decltype(x[0])>;
          const T r2 = x[0] * x[0] + x[1] * x[1];
          return (r2 - T(r_in * r_in)) * (r2 - T(r_out * r_out));
        },
        square_box(r_out));
  }
  throw ValidationError("unknown implicit domain expression id '" + expr + "'");
}

}  // namespace domains

DomainGeometry make_domain(const DomainSpec& spec) {
  auto param = [&](const std::string& key, double fallback) {
    auto it = spec.params.find(key);
    return it == spec.params.end() ? fallback : it->second;
  };
  if (spec.id == "disc") {
    return domains::disc(param("radius", 1.0), {param("cx", 0.0), param("cy", 0.0)}, param("scale", 1.0));
  }
  if (spec.id == "halfline") return domains::halfline(param("extent", 4.0));
  if (spec.id == "halfspace") {
    if (spec.normal.size() != 2) throw ValidationError("halfspace needs a two-component 'normal'");
    return domains::halfspace({spec.normal[0], spec.normal[1]}, param("extent", 2.0));
  }
  if (spec.id == "box") {
    const double half = param("half_width", 1.0);
    const int dim = static_cast<int>(param("dim", 2));
    Box b{dim, {-half, dim == 2 ? -half : 0.0}, {half, dim == 2 ? half : 0.0}};
    return domains::box(b);
  }
  if (spec.id == "sup_norm_square") return domains::sup_norm_square(param("radius", 1.0));
  if (spec.id == "implicit") return domains::implicit(spec.expr, spec.params);
  throw ValidationError("unknown domain id '" + spec.id + "'");
}

namespace {

// Damped Newton projection onto {g = 0}.
std::optional<Vec> project(const DomainGeometry& domain, Vec x) {
  const int dim = domain.dim();
  double gx = domain.g(x);
  for (int it = 0; it < kNewtonIterations; ++it) {
    if (std::fabs(gx) <= kProjectionTol) return x;
    const Vec d = domain.grad_g(x);
    const double d2 = dot(d, d, dim);
    if (!(d2 > 0.0) || !std::isfinite(d2)) return std::nullopt;
    double lambda = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 40; ++halving) {
      const Vec y = x - (lambda * gx / d2) * d;
      const double gy = domain.g(y);
      if (std::fabs(gy) < std::fabs(gx)) {
        x = y;
        gx = gy;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) return std::nullopt;
  }
  if (std::fabs(gx) <= kProjectionTol) return x;
  return std::nullopt;
}

bool near_kink(const DomainGeometry& domain, const Vec& x) {
  const int dim = domain.dim();
  for (int k = 0; k < dim; ++k) {
    Vec xp = x;
    Vec xm = x;
    xp[k] += kKinkBracket;
    xm[k] -= kKinkBracket;
    if (norm(domain.grad_g(xp) - domain.grad_g(xm), dim) > kKinkJump) return true;
  }
  return false;
}

}  // namespace

std::vector<BoundarySample> sample_boundary(const DomainGeometry& domain, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("boundary sample count must be at least 1");
  const int dim = domain.dim();
  const Box& box = domain.bounding_box();
  HaltonSequence halton(dim, seed);

  std::vector<BoundarySample> out;
  out.reserve(n);
  const std::size_t max_attempts = kAttemptFactor * n;
  for (std::size_t attempt = 0; attempt < max_attempts && out.size() < n; ++attempt) {
    const auto projected = project(domain, box.from_unit(halton.next()));
    if (!projected) continue;
    const Vec& x = *projected;
    if (!box.contains(x)) continue;
    if (near_kink(domain, x)) continue;
    const Vec d = domain.grad_g(x);
    const double len = norm(d, dim);
    if (!(len > 0.0)) continue;
    const Vec normal = (1.0 / len) * d;
    if (!(domain.g(x + kOutwardStep * normal) > 0.0 && domain.g(x - kOutwardStep * normal) < 0.0)) continue;
    out.push_back({x, normal, 0.0});
  }
  if (out.size() < n) {
    throw SamplingError("boundary sampling of '" + domain.name() + "' produced " + std::to_string(out.size()) +
                        " of " + std::to_string(n) + " points after " + std::to_string(max_attempts) +
                        " attempts");
  }
  for (auto& s : out) s.weight = 1.0 / static_cast<double>(n);
  return out;
}

FluxResidual zero_flux_residual(const CoefficientField& field, const DomainGeometry& domain,
                                const std::vector<BoundarySample>& samples) {
  if (field.dim() != domain.dim()) throw ValidationError("field and domain dimensions differ");
  if (samples.empty()) throw ValidationError("zero-flux residual needs at least one boundary sample");
  const int dim = field.dim();
  FluxResidual r;
  double weight = 0.0;
  for (const auto& s : samples) {
    const double v = norm(mat_vec(field.eval(s.point), s.normal, dim), dim);
    r.max = std::max(r.max, v);
    r.mean += s.weight * v;
    weight += s.weight;
  }
  if (weight > 0.0) r.mean /= weight;
  return r;
}

}  // namespace invlab
