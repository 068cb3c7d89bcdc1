#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "invlab/coefficients.hpp"
#include "invlab/functions.hpp"
#include "invlab/geometry.hpp"
#include "invlab/semigroup.hpp"

namespace invlab {

struct Tolerances {
  /// Verdict (II) holds when every escape fraction is at most this.
  double escape = 1e-3;
  /// Verdict (III) holds when the largest |C n| is at most this.
  double flux = 1e-8;
  /// leak_tol(h) = leak_factor * h.
  double leak_factor = 10.0;
  /// A checkpoint counts as outside once g exceeds this.
  double escape_level = 1e-6;
};

/// Initial state: a smooth bump (peak 1) or a normalised Gaussian.
struct InitialState {
  std::string kind = "bump";
  Vec centre{0.0, 0.0};
  double width = 0.4;
};

struct Scenario {
  std::string name;
  FieldSpec field;
  DomainSpec domain;
  /// Simulation box; must contain the domain's region of interest.
  Box grid_box;
  /// Inverse grid spacings, coarse to fine.
  std::vector<double> resolutions;
  double t = 0.5;
  double dt = 0.025;
  Scheme scheme = Scheme::crank_nicolson;
  InitialState initial;
  std::size_t flow_seeds = 500;
  double flow_time = 1.0;
  std::size_t boundary_samples = 10000;
  /// Short backward-Euler horizon for the hygiene checks.
  double hygiene_t = 0.002;
  double hygiene_dt = 2e-4;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  Tolerances tol;

  int dim() const { return grid_box.dim; }
  /// Throws ValidationError describing the first problem found.
  void validate() const;
};

namespace scenarios {

/// rotation_disc, radial_disc, identity_disc, delta_0.5_halfline,
/// delta_0.6_halfline, delta_0.75_halfline, heat_halfline.
Scenario builtin(const std::string& name);
std::vector<std::string> builtin_names();
/// The six scenarios of the equivalence suite (heat_halfline excluded).
std::vector<std::string> equivalence_suite();

}  // namespace scenarios

enum class Verdict { holds, fails, indeterminate };
const char* verdict_name(Verdict v);

struct EscapeEntry {
  VectorFieldKind kind = VectorFieldKind::row;
  /// "row1", "row2" or the psi name.
  std::string label;
  double forward = 0.0;
  double backward = 0.0;
  /// Fraction escaping in either time direction.
  double fraction = 0.0;
};

struct LeakageEntry {
  double h = 0.0;
  double absolute = 0.0;
  double relative = 0.0;
  int cg_iterations = 0;
};

struct RefinementFit {
  /// Least-squares slope of log(leakage) against log(h); NaN when converged.
  double order = 0.0;
  /// Every leakage at or below the floor; no fit attempted.
  bool converged = false;
};

inline constexpr double kLeakageFloor = 1e-14;

/// Slope fit with leakage floored at 1e-14.
RefinementFit refinement_fit(const std::vector<double>& h, const std::vector<double>& leakage);

/// Relative leakage |1_{Omega^c} S_t phi|/|S_t phi| per resolution.
std::vector<LeakageEntry> refinement_study(const Scenario& scenario, const std::vector<double>& resolutions);

/// Decision table for verdict (I) from the finest relative leakage.
Verdict semigroup_verdict(double finest_leakage, double leak_tol, const RefinementFit& fit);

struct InvarianceReport {
  Scenario scenario;
  FluxResidual flux;
  std::vector<EscapeEntry> rows;
  std::vector<EscapeEntry> psi;
  std::vector<LeakageEntry> leakage;
  RefinementFit fit;
  double leak_tol = 0.0;
  /// (I) semigroup, (II) flows, (III) zero flux.
  Verdict semigroup = Verdict::indeterminate;
  Verdict flows = Verdict::indeterminate;
  Verdict flux_verdict = Verdict::indeterminate;
  /// (II) from row flows alone and from the psi battery alone.
  Verdict flows_rows = Verdict::indeterminate;
  Verdict flows_psi = Verdict::indeterminate;
  /// (I), (II) and (III) identical.
  bool equivalence = false;
};

InvarianceReport invariance_verdict(const Scenario& scenario);

/// Zero-flux residual over the scenario's boundary sample.
FluxResidual scenario_flux(const Scenario& scenario);

/// Escape fractions of the row flows and the psi battery.
void scenario_escapes(const Scenario& scenario, std::vector<EscapeEntry>& rows, std::vector<EscapeEntry>& psi);

struct HygieneReport {
  double h = 0.0;
  double t = 0.0;
  double dt = 0.0;
  SubmarkovReport submarkov;
  /// |(S_t phi, chi) - (phi, S_t chi)|.
  double self_adjoint_defect = 0.0;
  /// |S_{2t} phi - S_t S_t phi|_2.
  double semigroup_defect = 0.0;
};

/// Backward-Euler hygiene checks at one resolution over the hygiene horizon.
HygieneReport semigroup_hygiene(const Scenario& scenario, double resolution);

/// Observables of one evolution of 1_Omega phi0 to time t.
struct RunMetrics {
  double mass_drift = 0.0;
  double linf_growth = 0.0;
  double positivity_violation = 0.0;
  double leakage = 0.0;
  double relative_leakage = 0.0;
};

RunMetrics semigroup_run(const Scenario& scenario, double resolution, Scheme scheme, double t, double dt);

/// The scenario's initial state.
ScalarFunction initial_state(const Scenario& scenario);

}  // namespace invlab
