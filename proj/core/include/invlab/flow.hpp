#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include "invlab/coefficients.hpp"
#include "invlab/functions.hpp"
#include "invlab/geometry.hpp"
#include "invlab/types.hpp"

namespace invlab {

struct FlowSettings {
  /// Upper bound on the RK4 step; the step used is min(max_step, |t|/100).
  double max_step = 1e-3;
  /// Richardson error allowance per unit time. Infinity disables control.
  double tolerance = 1e-9;
  int max_halvings = 12;
  int checkpoints_per_unit_time = 100;
};

enum class FlowStatus { ok, escaped_box };

struct FlowResult {
  Vec point{0.0, 0.0};
  FlowStatus status = FlowStatus::ok;
  /// Time actually integrated (signed); equals t unless the box was left.
  double time = 0.0;
  /// Step size that met the tolerance.
  double step = 0.0;
};

/// omega_t(x) for the characteristic ODE x' = b(x), integrated by fixed-step
/// RK4. Each pair of steps is checked against one double step; when the
/// Richardson estimate exceeds the allowance the whole trajectory is redone
/// with half the step. Trajectories leaving `box` inflated by 2 stop there
/// with status escaped_box.
class FlowMap {
 public:
  using Checkpoint = std::function<bool(double time, const Vec& x)>;

  FlowMap(VectorField field, Box box, FlowSettings settings = {});

  const VectorField& field() const { return field_; }
  const Box& box() const { return box_; }
  const FlowSettings& settings() const { return settings_; }

  /// Endpoint, cached by (x0, t).
  FlowResult operator()(const Vec& x0, double t) const;

  /// Integrates to t, calling `visit` at the start point and at every
  /// checkpoint (checkpoints_per_unit_time per unit time, plus the end).
  /// Returning false from `visit` stops early; the result then holds the
  /// last visited point.
  FlowResult trace(const Vec& x0, double t, const Checkpoint& visit) const;

  std::size_t cache_size() const;

 private:
  struct Cache;

  VectorField field_;
  Box box_;
  Box escape_box_;
  FlowSettings settings_;
  std::shared_ptr<Cache> cache_;
};

FlowResult flow_map(const VectorField& vf, const Box& box, const Vec& x0, double t, FlowSettings settings = {});

/// x -> phi(omega_t(x)). Throws IntegrationError when a trajectory leaves the
/// inflated box, since phi is then unknown there.
ScalarFunction pullback(const FlowMap& flow, const ScalarFunction& phi, double t);

/// Fraction of quasi-random start points in Omega whose trajectory has
/// g > escape_level at a checkpoint or at the point where it left the box.
/// `workers` > 1 splits the seeds across threads; counts are merged as
/// integers so the result does not depend on the split.
double escape_fraction(const FlowMap& flow, const DomainGeometry& domain, std::size_t seeds, double t,
                       std::uint64_t seed, unsigned workers = 1, double escape_level = 1e-6);

/// Start points for escape_fraction: the first `count` Halton points of the
/// bounding box that lie in Omega.
std::vector<Vec> interior_points(const DomainGeometry& domain, std::size_t count, std::uint64_t seed);

}  // namespace invlab
