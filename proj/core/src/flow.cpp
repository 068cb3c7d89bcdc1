#include "invlab/flow.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>
#include <vector>

#include "invlab/quasi_random.hpp"

namespace invlab {
namespace {

constexpr std::size_t kCacheLimit = 1u << 20;

Vec rk4_step(const VectorField& b, const Vec& x, double h) {
  const Vec k1 = b(x);
  const Vec k2 = b(x + (0.5 * h) * k1);
  const Vec k3 = b(x + (0.5 * h) * k2);
  const Vec k4 = b(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

struct FlowMap::Cache {
  using Key = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>;
  std::mutex mutex;
  std::map<Key, FlowResult> entries;

  static Key key(const Vec& x, double t) {
    return {std::bit_cast<std::uint64_t>(x[0]), std::bit_cast<std::uint64_t>(x[1]), std::bit_cast<std::uint64_t>(t)};
  }
};

FlowMap::FlowMap(VectorField field, Box box, FlowSettings settings)
    : field_(std::move(field)),
      box_(box),
      escape_box_(box.inflated(2.0)),
      settings_(settings),
      cache_(std::make_shared<Cache>()) {
  if (box_.dim != field_.dim() || box_.degenerate()) throw ValidationError("flow box does not match the field");
  if (!(settings_.max_step > 0.0)) throw ValidationError("flow step must be positive");
  if (settings_.max_halvings < 0 || settings_.checkpoints_per_unit_time < 1) {
    throw ValidationError("invalid flow settings");
  }
}

std::size_t FlowMap::cache_size() const {
  std::lock_guard<std::mutex> lock(cache_->mutex);
  return cache_->entries.size();
}

FlowResult FlowMap::operator()(const Vec& x0, double t) const {
  const auto key = Cache::key(x0, t);
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->entries.find(key);
    if (it != cache_->entries.end()) return it->second;
  }
  FlowResult r = trace(x0, t, {});
  std::lock_guard<std::mutex> lock(cache_->mutex);
  if (cache_->entries.size() >= kCacheLimit) cache_->entries.clear();
  cache_->entries.emplace(key, r);
  return r;
}

FlowResult FlowMap::trace(const Vec& x0, double t, const Checkpoint& visit) const {
  if (!std::isfinite(t)) throw ValidationError("flow time must be finite");
  const int dim = field_.dim();
  if (t == 0.0) {
    if (visit) visit(0.0, x0);
    return {x0, FlowStatus::ok, 0.0, 0.0};
  }

  const double span = std::fabs(t);
  const auto intervals = static_cast<long long>(
      std::max(1.0, std::ceil(span * settings_.checkpoints_per_unit_time - 1e-9)));
  const double interval = t / static_cast<double>(intervals);
  const double base = std::min(settings_.max_step, span / 100.0);
  const bool controlled = std::isfinite(settings_.tolerance);

  double worst = 0.0;
  for (int halving = 0; halving <= settings_.max_halvings; ++halving) {
    const double target = std::ldexp(base, -halving);
    auto steps = static_cast<long long>(std::ceil(std::fabs(interval) / target - 1e-9));
    steps = std::max<long long>(2, steps + (steps % 2));
    const double h = interval / static_cast<double>(steps);

    Vec x = x0;
    bool retry = false;
    worst = 0.0;
    if (visit && !visit(0.0, x)) return {x, FlowStatus::ok, 0.0, std::fabs(h)};
    for (long long c = 0; c < intervals && !retry; ++c) {
      for (long long s = 0; s < steps; s += 2) {
        const Vec half = rk4_step(field_, x, h);
        const Vec two = rk4_step(field_, half, h);
        if (controlled) {
          const Vec big = rk4_step(field_, x, 2.0 * h);
          const double estimate = norm(two - big, dim) / 15.0;
          const double allowance = settings_.tolerance * 2.0 * std::fabs(h) * (1.0 + norm(x, dim));
          worst = std::max(worst, estimate / allowance);
          if (!(estimate <= allowance)) {
            retry = true;
            break;
          }
        }
        x = two;
        const double now = interval * static_cast<double>(c) + h * static_cast<double>(s + 2);
        if (!escape_box_.contains(x)) {
          if (visit) visit(now, x);
          return {x, FlowStatus::escaped_box, now, std::fabs(h)};
        }
      }
      if (retry) break;
      const double now = (c + 1 == intervals) ? t : interval * static_cast<double>(c + 1);
      if (visit && !visit(now, x)) return {x, FlowStatus::ok, now, std::fabs(h)};
    }
    if (!retry) return {x, FlowStatus::ok, t, std::fabs(h)};
  }
  throw IntegrationError("RK4 step control failed after " + std::to_string(settings_.max_halvings) +
                         " halvings from " + format_point(x0, dim) + " (error ratio " + std::to_string(worst) +
                         ")");
}

FlowResult flow_map(const VectorField& vf, const Box& box, const Vec& x0, double t, FlowSettings settings) {
  return FlowMap(vf, box, settings).trace(x0, t, {});
}

ScalarFunction pullback(const FlowMap& flow, const ScalarFunction& phi, double t) {
  ScalarFunction out;
  out.name = phi.name + "@flow";
  out.dim = phi.dim;
  out.value = [flow, phi, t](const Vec& x) {
    const FlowResult r = flow(x, t);
    if (r.status == FlowStatus::escaped_box) {
      throw IntegrationError("trajectory from " + format_point(x, flow.field().dim()) +
                             " left the integration box before time " + std::to_string(t));
    }
    return phi(r.point);
  };
  return out;
}

std::vector<Vec> interior_points(const DomainGeometry& domain, std::size_t count, std::uint64_t seed) {
  HaltonSequence halton(domain.dim(), seed);
  std::vector<Vec> out;
  out.reserve(count);
  const std::size_t limit = 1000 * std::max<std::size_t>(count, 1);
  for (std::size_t i = 0; i < limit && out.size() < count; ++i) {
    const Vec x = domain.bounding_box().from_unit(halton.next());
    if (domain.contains(x)) out.push_back(x);
  }
  if (out.size() < count) throw SamplingError("domain '" + domain.name() + "' has too little volume to seed");
  return out;
}

double escape_fraction(const FlowMap& flow, const DomainGeometry& domain, std::size_t seeds, double t,
                       std::uint64_t seed, unsigned workers, double escape_level) {
  if (seeds < 1) throw ValidationError("escape_fraction needs at least one seed");
  if (flow.field().dim() != domain.dim()) throw ValidationError("flow and domain dimensions differ");
  const std::vector<Vec> starts = interior_points(domain, seeds, seed);

  auto escapes = [&](const Vec& x0) {
    bool escaped = false;
    flow.trace(x0, t, [&](double, const Vec& x) {
      escaped = domain.g(x) > escape_level;
      return !escaped;
    });
    return escaped;
  };

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(seeds)));
  std::vector<std::size_t> counts(workers, 0);
  auto run = [&](unsigned w) {
    for (std::size_t i = w; i < starts.size(); i += workers) {
      if (escapes(starts[i])) ++counts[w];
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& th : pool) th.join();
  }
  std::size_t total = 0;
  for (auto c : counts) total += c;
  return static_cast<double>(total) / static_cast<double>(seeds);
}

}  // namespace invlab
