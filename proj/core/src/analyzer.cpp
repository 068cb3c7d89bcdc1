#include "invlab/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "invlab/flow.hpp"

namespace invlab {

void Scenario::validate() const {
  if (name.empty()) throw ValidationError("scenario needs a name");
  if (grid_box.dim < 1 || grid_box.dim > kMaxDim || grid_box.degenerate()) {
    throw ValidationError("scenario grid box is invalid");
  }
  const CoefficientField f = make_field(field);
  const DomainGeometry d = make_domain(domain);
  if (f.dim() != dim() || d.dim() != dim()) {
    throw ValidationError("scenario dimensions disagree: field " + std::to_string(f.dim()) + ", domain " +
                          std::to_string(d.dim()) + ", grid " + std::to_string(dim()));
  }
  if (resolutions.size() < 2) throw ValidationError("refinement needs at least two resolutions");
  for (double r : resolutions) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("resolutions must be positive");
    Grid check(grid_box, 1.0 / r);
  }
  if (!(t > 0.0) || !(dt > 0.0) || dt > t) throw ValidationError("need 0 < dt <= t");
  if (!(hygiene_t > 0.0) || !(hygiene_dt > 0.0) || hygiene_dt > hygiene_t) {
    throw ValidationError("need 0 < hygiene_dt <= hygiene_t");
  }
  if (initial.kind != "bump" && initial.kind != "gaussian") {
    throw ValidationError("initial state kind must be 'bump' or 'gaussian'");
  }
  if (!(initial.width > 0.0)) throw ValidationError("initial state width must be positive");
  if (flow_seeds < 1) throw ValidationError("flow_seeds must be at least 1");
  if (!(flow_time > 0.0) || !std::isfinite(flow_time)) throw ValidationError("flow_time must be positive");
  if (boundary_samples < 1) throw ValidationError("boundary_samples must be at least 1");
  if (!(tol.escape >= 0.0 && tol.flux >= 0.0 && tol.leak_factor > 0.0 && tol.escape_level >= 0.0)) {
    throw ValidationError("tolerances must be nonnegative");
  }
}

namespace scenarios {
namespace {

Scenario disc_scenario(const std::string& name, FieldSpec field) {
  Scenario s;
  s.name = name;
  s.field = std::move(field);
  s.domain = DomainSpec{"disc", {{"radius", 1.0}}, "", {}};
  s.grid_box = Box{2, {-1.5, -1.5}, {1.5, 1.5}};
  s.resolutions = {64, 128, 256};
  s.t = 0.5;
  s.dt = 0.025;
  s.initial = InitialState{"bump", {0.5, 0.0}, 0.4};
  s.hygiene_t = 0.002;
  s.hygiene_dt = 2e-4;
  return s;
}

Scenario halfline_scenario(const std::string& name, FieldSpec field, double extent) {
  Scenario s;
  s.name = name;
  s.field = std::move(field);
  s.domain = DomainSpec{"halfline", {{"extent", extent}}, "", {}};
  s.grid_box = Box{1, {-extent, 0.0}, {extent, 0.0}};
  s.resolutions = {128, 256, 512};
  s.t = 0.5;
  s.dt = 1e-3;
  s.initial = InitialState{"bump", {1.0, 0.0}, 0.5};
  s.hygiene_t = 0.01;
  s.hygiene_dt = 1e-3;
  return s;
}

}  // namespace

Scenario builtin(const std::string& name) {
  if (name == "rotation_disc") return disc_scenario(name, FieldSpec{"rotation", {}, ""});
  if (name == "radial_disc") return disc_scenario(name, FieldSpec{"radial_disc", {{"power", 2.0}}, ""});
  if (name == "identity_disc") return disc_scenario(name, FieldSpec{"identity", {{"dim", 2.0}}, ""});
  for (const char* delta : {"0.5", "0.6", "0.75"}) {
    if (name == std::string("delta_") + delta + "_halfline") {
      return halfline_scenario(name, FieldSpec{"delta_family", {{"delta", std::stod(delta)}}, ""}, 4.0);
    }
  }
  if (name == "heat_halfline") {
    Scenario s = halfline_scenario(name, FieldSpec{"scalar_1d", {}, "constant"}, 8.0);
    s.resolutions = {256, 512};
    s.initial = InitialState{"gaussian", {1.0, 0.0}, 0.1};
    return s;
  }
  throw ValidationError("unknown built-in scenario '" + name + "'");
}

std::vector<std::string> builtin_names() {
  return {"rotation_disc",      "radial_disc",        "identity_disc", "delta_0.5_halfline",
          "delta_0.6_halfline", "delta_0.75_halfline", "heat_halfline"};
}

std::vector<std::string> equivalence_suite() {
  return {"rotation_disc", "radial_disc", "delta_0.5_halfline", "delta_0.6_halfline", "delta_0.75_halfline",
          "identity_disc"};
}

}  // namespace scenarios

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::holds:
      return "true";
    case Verdict::fails:
      return "false";
    case Verdict::indeterminate:
      break;
  }
  return "indeterminate";
}

ScalarFunction initial_state(const Scenario& scenario) {
  if (scenario.initial.kind == "gaussian") {
    return functions::gaussian(scenario.dim(), scenario.initial.centre, scenario.initial.width);
  }
  return functions::bump(scenario.dim(), scenario.initial.centre, scenario.initial.width);
}

RefinementFit refinement_fit(const std::vector<double>& h, const std::vector<double>& leakage) {
  if (h.size() != leakage.size() || h.size() < 2) throw ValidationError("refinement fit needs two or more points");
  RefinementFit fit;
  if (std::all_of(leakage.begin(), leakage.end(), [](double v) { return v <= kLeakageFloor; })) {
    fit.converged = true;
    fit.order = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  const auto n = static_cast<double>(h.size());
  double sx = 0.0;
  double sy = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(std::max(leakage[i], kLeakageFloor));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (!(denom > 0.0)) throw ValidationError("refinement fit needs distinct spacings");
  fit.order = (n * sxy - sx * sy) / denom;
  return fit;
}

std::vector<LeakageEntry> refinement_study(const Scenario& scenario, const std::vector<double>& resolutions) {
  if (resolutions.size() < 2) throw ValidationError("refinement study needs at least two resolutions");
  const CoefficientField field = make_field(scenario.field);
  const DomainGeometry domain = make_domain(scenario.domain);
  const ScalarFunction phi = initial_state(scenario);

  std::vector<LeakageEntry> out;
  for (double r : resolutions) {
    const Grid grid(scenario.grid_box, 1.0 / r);
    const DiscreteOperator op = assemble(field, grid);
    const GridFunction inside = indicator(grid, domain);
    const GridFunction u0 = grid.sample(phi.value).cwiseProduct(inside);
    const long long steps = step_count(scenario.t, scenario.dt);
    const Evolver ev(op, scenario.t / static_cast<double>(steps), scenario.scheme);
    const GridFunction u = ev.advance(u0, steps);
    const GridFunction outside = u.cwiseProduct(GridFunction::Ones(u.size()) - inside);

    LeakageEntry e;
    e.h = grid.spacing();
    e.absolute = l2_norm(grid, outside);
    const double total = l2_norm(grid, u);
    e.relative = total > 0.0 ? e.absolute / total : 0.0;
    e.cg_iterations = ev.total_iterations();
    out.push_back(e);
  }
  return out;
}

Verdict semigroup_verdict(double finest_leakage, double leak_tol, const RefinementFit& fit) {
  if (fit.converged) return Verdict::holds;
  if (finest_leakage <= leak_tol) return fit.order >= 1.0 ? Verdict::holds : Verdict::indeterminate;
  return fit.order < 0.5 ? Verdict::fails : Verdict::indeterminate;
}

FluxResidual scenario_flux(const Scenario& scenario) {
  const CoefficientField field = make_field(scenario.field);
  const DomainGeometry domain = make_domain(scenario.domain);
  return zero_flux_residual(field, domain, sample_boundary(domain, scenario.boundary_samples, scenario.seed));
}

namespace {

EscapeEntry escape_both_ways(const VectorField& vf, VectorFieldKind kind, std::string label,
                             const DomainGeometry& domain, const std::vector<Vec>& starts, const Scenario& s) {
  const FlowMap flow(vf, domain.bounding_box());
  auto escapes = [&](const Vec& x0, double t) {
    bool escaped = false;
    flow.trace(x0, t, [&](double, const Vec& x) {
      escaped = domain.g(x) > s.tol.escape_level;
      return !escaped;
    });
    return escaped;
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(s.workers, static_cast<unsigned>(starts.size())));
  struct Counts {
    std::size_t forward = 0;
    std::size_t backward = 0;
    std::size_t either = 0;
  };
  std::vector<Counts> counts(workers);
  auto run = [&](unsigned w) {
    for (std::size_t i = w; i < starts.size(); i += workers) {
      const bool f = escapes(starts[i], s.flow_time);
      const bool b = escapes(starts[i], -s.flow_time);
      counts[w].forward += f;
      counts[w].backward += b;
      counts[w].either += (f || b);
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& th : pool) th.join();
  }
  Counts total;
  for (const auto& c : counts) {
    total.forward += c.forward;
    total.backward += c.backward;
    total.either += c.either;
  }
  const auto n = static_cast<double>(starts.size());
  EscapeEntry e;
  e.kind = kind;
  e.label = std::move(label);
  e.forward = static_cast<double>(total.forward) / n;
  e.backward = static_cast<double>(total.backward) / n;
  e.fraction = static_cast<double>(total.either) / n;
  return e;
}

Verdict all_below(const std::vector<EscapeEntry>& entries, double tol) {
  for (const auto& e : entries) {
    if (e.fraction > tol) return Verdict::fails;
  }
  return Verdict::holds;
}

}  // namespace

void scenario_escapes(const Scenario& scenario, std::vector<EscapeEntry>& rows, std::vector<EscapeEntry>& psi) {
  const CoefficientField field = make_field(scenario.field);
  const DomainGeometry domain = make_domain(scenario.domain);
  const std::vector<Vec> starts = interior_points(domain, scenario.flow_seeds, scenario.seed);
  rows.clear();
  psi.clear();
  for (int k = 1; k <= field.dim(); ++k) {
    rows.push_back(escape_both_ways(make_row_field(field, k), VectorFieldKind::row, "row" + std::to_string(k), domain,
                                    starts, scenario));
  }
  for (const ScalarFunction& p : functions::psi_battery(domain.bounding_box())) {
    psi.push_back(escape_both_ways(make_psi_field(field, p), VectorFieldKind::psi, p.name, domain, starts, scenario));
  }
}

InvarianceReport invariance_verdict(const Scenario& scenario) {
  scenario.validate();
  InvarianceReport r;
  r.scenario = scenario;

  r.flux = scenario_flux(scenario);
  r.flux_verdict = r.flux.max <= scenario.tol.flux ? Verdict::holds : Verdict::fails;

  scenario_escapes(scenario, r.rows, r.psi);
  r.flows_rows = all_below(r.rows, scenario.tol.escape);
  r.flows_psi = all_below(r.psi, scenario.tol.escape);
  r.flows = (r.flows_rows == Verdict::holds && r.flows_psi == Verdict::holds) ? Verdict::holds : Verdict::fails;

  r.leakage = refinement_study(scenario, scenario.resolutions);
  std::vector<double> hs;
  std::vector<double> leaks;
  for (const auto& e : r.leakage) {
    hs.push_back(e.h);
    leaks.push_back(e.relative);
  }
  r.fit = refinement_fit(hs, leaks);
  const LeakageEntry& finest = *std::min_element(
      r.leakage.begin(), r.leakage.end(), [](const LeakageEntry& a, const LeakageEntry& b) { return a.h < b.h; });
  r.leak_tol = scenario.tol.leak_factor * finest.h;
  r.semigroup = semigroup_verdict(finest.relative, r.leak_tol, r.fit);

  r.equivalence = r.semigroup == r.flows && r.flows == r.flux_verdict;
  return r;
}

HygieneReport semigroup_hygiene(const Scenario& scenario, double resolution) {
  const CoefficientField field = make_field(scenario.field);
  const Grid grid(scenario.grid_box, 1.0 / resolution);
  const DiscreteOperator op = assemble(field, grid);
  const ScalarFunction phi = initial_state(scenario);
  InitialState shifted = scenario.initial;
  shifted.centre[0] += 0.5 * shifted.width;
  Scenario other = scenario;
  other.initial = shifted;
  const ScalarFunction chi = initial_state(other);

  const GridFunction u = grid.sample(phi.value);
  const GridFunction v = grid.sample(chi.value);

  HygieneReport r;
  r.h = grid.spacing();
  r.t = scenario.hygiene_t;
  r.dt = scenario.hygiene_dt;
  r.submarkov = submarkov_report(op, u, r.t, r.dt);

  const long long steps = step_count(r.t, r.dt);
  const Evolver ev(op, r.t / static_cast<double>(steps), Scheme::backward_euler);
  const GridFunction su = ev.advance(u, steps);
  const GridFunction sv = ev.advance(v, steps);
  r.self_adjoint_defect = std::fabs(su.dot(v) - u.dot(sv)) * grid.weight();

  const GridFunction once = ev.advance(u, 2 * steps);
  const GridFunction twice = ev.advance(su, steps);
  r.semigroup_defect = l2_norm(grid, once - twice);
  return r;
}

RunMetrics semigroup_run(const Scenario& scenario, double resolution, Scheme scheme, double t, double dt) {
  const CoefficientField field = make_field(scenario.field);
  const DomainGeometry domain = make_domain(scenario.domain);
  const Grid grid(scenario.grid_box, 1.0 / resolution);
  const DiscreteOperator op = assemble(field, grid);
  const GridFunction inside = indicator(grid, domain);
  const GridFunction u0 = grid.sample(initial_state(scenario).value).cwiseProduct(inside);
  const GridFunction u = evolve(op, u0, t, dt, scheme);

  RunMetrics m;
  m.mass_drift = std::fabs(u.sum() - u0.sum()) * grid.weight();
  const double linf0 = u0.cwiseAbs().maxCoeff();
  m.linf_growth = linf0 > 0.0 ? u.cwiseAbs().maxCoeff() / linf0 : 0.0;
  m.positivity_violation = std::max(0.0, -u.minCoeff());
  m.leakage = l2_norm(grid, u.cwiseProduct(GridFunction::Ones(u.size()) - inside));
  const double total = l2_norm(grid, u);
  m.relative_leakage = total > 0.0 ? m.leakage / total : 0.0;
  return m;
}

}  // namespace invlab
