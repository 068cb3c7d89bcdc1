#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>

#include "invlab/analyzer.hpp"
#include "invlab/experiments.hpp"
#include "invlab/flow.hpp"

namespace invlab::cli {
namespace {

using nlohmann::json;

// Starts per flow used for the group-law and reversal probe.
constexpr std::size_t kGroupLawProbes = 32;
constexpr double kGroupLawTol = 1e-8;

// Hygiene thresholds.
constexpr double kMassTol = 1e-10;
constexpr double kLinfTol = 1e-10;
constexpr double kPositivityTol = 1e-12;
constexpr double kSelfAdjointTol = 1e-10;
constexpr double kSemigroupTol = 1e-8;

// Slack on the cutoff and commutator bounds.
constexpr double kBoundSlack = 1.1;

std::string fmt(double v) { return format_double(v); }

const char* pass_fail(bool ok) { return ok ? "pass" : "fail"; }

const char* kind_name(VectorFieldKind k) {
  switch (k) {
    case VectorFieldKind::row:
      return "row";
    case VectorFieldKind::psi:
      return "psi";
    case VectorFieldKind::custom:
      break;
  }
  return "custom";
}

class Context {
 public:
  Context(const RunConfig& config, RunOutcome& out) : config_(config), out_(out) {}

  const RunConfig& config() const { return config_; }
  const Scenario& scenario() const { return config_.scenario; }

  void summary(const std::string& verb, std::string check, double value, std::string threshold,
               std::string status) {
    out_.summary.push_back({scenario().name, verb, std::move(check), fmt(value), std::move(threshold),
                            std::move(status)});
  }

  void table(std::string name, CsvTable t) { out_.tables.emplace_back(std::move(name), std::move(t)); }
  json& section(const std::string& key) { return out_.report[key]; }

 private:
  const RunConfig& config_;
  RunOutcome& out_;
};

// Largest of |w_t(x) - w_{t/2}(w_{t/2}(x))| and |w_{-t}(w_t(x)) - x|, both
// scaled by 1 + |x|, over the first probes. Trajectories that leave the
// inflated box are skipped since the map is not followed beyond it.
double group_law_defect(const VectorField& vf, const DomainGeometry& domain, const std::vector<Vec>& starts,
                        double t) {
  const FlowMap flow(vf, domain.bounding_box());
  const int dim = vf.dim();
  double worst = 0.0;
  const std::size_t probes = std::min(kGroupLawProbes, starts.size());
  for (std::size_t i = 0; i < probes; ++i) {
    const Vec& x = starts[i];
    const FlowResult full = flow(x, t);
    const FlowResult half = flow(x, 0.5 * t);
    if (full.status != FlowStatus::ok || half.status != FlowStatus::ok) continue;
    const FlowResult composed = flow(half.point, 0.5 * t);
    const FlowResult back = flow(full.point, -t);
    const double scale = 1.0 + norm(x, dim);
    if (composed.status == FlowStatus::ok) worst = std::max(worst, norm(composed.point - full.point, dim) / scale);
    if (back.status == FlowStatus::ok) worst = std::max(worst, norm(back.point - x, dim) / scale);
  }
  return worst;
}

void run_flows(Context& ctx, const std::vector<EscapeEntry>& rows, const std::vector<EscapeEntry>& psi) {
  const Scenario& s = ctx.scenario();
  const CoefficientField field = make_field(s.field);
  const DomainGeometry domain = make_domain(s.domain);
  const std::vector<Vec> starts = interior_points(domain, s.flow_seeds, s.seed);
  const auto battery = functions::psi_battery(domain.bounding_box());

  CsvTable t({"scenario", "field_kind", "k_or_psi", "t", "seeds", "escape_fraction", "max_group_law_defect"});
  json entries = json::array();
  auto emit = [&](const EscapeEntry& e, const VectorField& vf) {
    for (double sign : {1.0, -1.0}) {
      const double time = sign * s.flow_time;
      const double fraction = sign > 0 ? e.forward : e.backward;
      const double defect = group_law_defect(vf, domain, starts, time);
      t.add({s.name, kind_name(e.kind), e.label, fmt(time), std::to_string(s.flow_seeds), fmt(fraction),
             fmt(defect)});
      entries.push_back({{"field_kind", kind_name(e.kind)},
                         {"k_or_psi", e.label},
                         {"t", time},
                         {"seeds", s.flow_seeds},
                         {"escape_fraction", fraction},
                         {"max_group_law_defect", defect}});
      const std::string suffix = e.label + "_t=" + fmt(time);
      ctx.summary("flows", "escape_" + suffix, fraction, fmt(s.tol.escape), pass_fail(fraction <= s.tol.escape));
      ctx.summary("flows", "group_law_" + suffix, defect, fmt(kGroupLawTol), pass_fail(defect <= kGroupLawTol));
    }
  };
  for (std::size_t k = 0; k < rows.size(); ++k) emit(rows[k], make_row_field(field, static_cast<int>(k) + 1));
  for (std::size_t k = 0; k < psi.size(); ++k) emit(psi[k], make_psi_field(field, battery[k]));

  ctx.section("flows") = {{"t", s.flow_time}, {"seeds", s.flow_seeds}, {"entries", entries}};
  ctx.table("flows.csv", std::move(t));
}

void run_semigroup(Context& ctx) {
  const Scenario& s = ctx.scenario();
  CsvTable t({"scenario", "h", "scheme", "dt", "t", "mass_drift", "linf_growth", "positivity_violation", "leakage"});
  json runs = json::array();
  json hygiene = json::array();
  for (double r : s.resolutions) {
    const double h = 1.0 / r;
    for (Scheme scheme : {Scheme::crank_nicolson, Scheme::backward_euler}) {
      const RunMetrics m = semigroup_run(s, r, scheme, s.t, s.dt);
      t.add({s.name, fmt(h), scheme_name(scheme), fmt(s.dt), fmt(s.t), fmt(m.mass_drift), fmt(m.linf_growth),
             fmt(m.positivity_violation), fmt(m.leakage)});
      runs.push_back({{"h", h},
                      {"scheme", scheme_name(scheme)},
                      {"dt", s.dt},
                      {"t", s.t},
                      {"mass_drift", m.mass_drift},
                      {"linf_growth", m.linf_growth},
                      {"positivity_violation", m.positivity_violation},
                      {"leakage", m.leakage},
                      {"relative_leakage", m.relative_leakage}});
    }

    const HygieneReport hy = semigroup_hygiene(s, r);
    const std::string at = "_h=" + fmt(hy.h);
    ctx.summary("semigroup", "mass_drift" + at, hy.submarkov.mass_drift, fmt(kMassTol),
                pass_fail(hy.submarkov.mass_drift <= kMassTol));
    ctx.summary("semigroup", "linf_growth" + at, hy.submarkov.linf_growth, fmt(1.0 + kLinfTol),
                pass_fail(hy.submarkov.linf_growth <= 1.0 + kLinfTol));
    ctx.summary("semigroup", "positivity_violation" + at, hy.submarkov.positivity_violation, fmt(kPositivityTol),
                pass_fail(hy.submarkov.positivity_violation <= kPositivityTol));
    ctx.summary("semigroup", "self_adjoint_defect" + at, hy.self_adjoint_defect, fmt(kSelfAdjointTol),
                pass_fail(hy.self_adjoint_defect <= kSelfAdjointTol));
    ctx.summary("semigroup", "semigroup_defect" + at, hy.semigroup_defect, fmt(kSemigroupTol),
                pass_fail(hy.semigroup_defect <= kSemigroupTol));
    hygiene.push_back({{"h", hy.h},
                       {"t", hy.t},
                       {"dt", hy.dt},
                       {"scheme", scheme_name(Scheme::backward_euler)},
                       {"mass_drift", hy.submarkov.mass_drift},
                       {"linf_growth", hy.submarkov.linf_growth},
                       {"l1_growth", hy.submarkov.l1_growth},
                       {"positivity_violation", hy.submarkov.positivity_violation},
                       {"self_adjoint_defect", hy.self_adjoint_defect},
                       {"semigroup_defect", hy.semigroup_defect}});
  }
  ctx.section("semigroup") = {{"runs", runs}, {"hygiene", hygiene}};
  ctx.table("semigroup.csv", std::move(t));
}

json escape_json(const std::vector<EscapeEntry>& entries) {
  json out = json::array();
  for (const auto& e : entries) {
    out.push_back({{"field_kind", kind_name(e.kind)},
                   {"k_or_psi", e.label},
                   {"forward", e.forward},
                   {"backward", e.backward},
                   {"fraction", e.fraction}});
  }
  return out;
}

InvarianceReport run_invariance(Context& ctx) {
  const Scenario& s = ctx.scenario();
  const InvarianceReport r = invariance_verdict(s);

  json leakage = json::array();
  for (const auto& e : r.leakage) {
    leakage.push_back(
        {{"h", e.h}, {"absolute", e.absolute}, {"relative", e.relative}, {"cg_iterations", e.cg_iterations}});
  }
  ctx.section("invariance") = {
      {"residuals", {{"flux_max", r.flux.max}, {"flux_mean", r.flux.mean}, {"flux_tol", s.tol.flux}}},
      {"escapes", {{"rows", escape_json(r.rows)}, {"psi", escape_json(r.psi)}, {"escape_tol", s.tol.escape}}},
      {"leakage",
       {{"entries", leakage},
        {"order", r.fit.converged ? json("converged") : json(r.fit.order)},
        {"leak_tol", r.leak_tol}}},
      {"verdicts",
       {{"semigroup", verdict_name(r.semigroup)},
        {"flows", verdict_name(r.flows)},
        {"zero_flux", verdict_name(r.flux_verdict)},
        {"flows_rows", verdict_name(r.flows_rows)},
        {"flows_psi", verdict_name(r.flows_psi)}}},
      {"equivalence", r.equivalence}};

  ctx.summary("invariance", "flux_max", r.flux.max, fmt(s.tol.flux), verdict_name(r.flux_verdict));
  for (const auto* list : {&r.rows, &r.psi}) {
    for (const auto& e : *list) {
      ctx.summary("invariance", "escape_" + e.label, e.fraction, fmt(s.tol.escape),
                  pass_fail(e.fraction <= s.tol.escape));
    }
  }
  for (const auto& e : r.leakage) {
    ctx.summary("invariance", "leakage_h=" + fmt(e.h), e.relative, fmt(s.tol.leak_factor * e.h), "info");
  }
  ctx.summary("invariance", "refinement_order", r.fit.converged ? 0.0 : r.fit.order, "1",
              r.fit.converged ? "converged" : (r.fit.order >= 1.0 ? "pass" : "fail"));
  ctx.summary("invariance", "verdict_semigroup", r.leakage.empty() ? 0.0 : r.leakage.back().relative,
              fmt(r.leak_tol), verdict_name(r.semigroup));
  double worst_escape = 0.0;
  for (const auto* list : {&r.rows, &r.psi}) {
    for (const auto& e : *list) worst_escape = std::max(worst_escape, e.fraction);
  }
  ctx.summary("invariance", "verdict_flows", worst_escape, fmt(s.tol.escape), verdict_name(r.flows));
  ctx.summary("invariance", "verdict_zero_flux", r.flux.max, fmt(s.tol.flux), verdict_name(r.flux_verdict));
  ctx.summary("invariance", "equivalence", r.equivalence ? 1.0 : 0.0, "1", r.equivalence ? "true" : "false");
  return r;
}

void run_capacity(Context& ctx) {
  const Scenario& s = ctx.scenario();
  const ExperimentSettings& ex = ctx.config().experiments;
  const CoefficientField field = make_field(s.field);
  const DomainGeometry domain = make_domain(s.domain);
  if (!domain.chart()) throw ValidationError("domain '" + domain.name() + "' is not graph-representable");
  const GraphChart& chart = *domain.chart();

  double min_side = s.grid_box.side(0);
  for (int k = 1; k < s.dim(); ++k) min_side = std::min(min_side, s.grid_box.side(k));
  const Vec origin{chart.tau(0.0), 0.0};
  const ScalarFunction phi = functions::bump(s.dim(), origin, 0.25 * min_side);
  const Grid grid(s.grid_box, 1.0 / ex.cutoff_resolution);
  const auto entries = cutoff_sequence(field, domain, grid, phi, ex.cutoff_n, {4096, ctx.config().seed});

  CsvTable t({"scenario", "n", "value", "bound", "ratio"});
  json rows = json::array();
  for (const auto& e : entries) {
    const double ratio = e.bound > 0.0 ? e.value / e.bound : 0.0;
    t.add({s.name, std::to_string(e.n), fmt(e.value), fmt(e.bound), fmt(ratio)});
    rows.push_back({{"n", e.n},
                    {"value", e.value},
                    {"two_h_phi", e.two_h_phi},
                    {"envelope", e.envelope},
                    {"bound", e.bound},
                    {"ratio", ratio}});
    ctx.summary("capacity", "cutoff_ratio_n=" + std::to_string(e.n), ratio, fmt(kBoundSlack),
                pass_fail(ratio <= kBoundSlack));
  }
  ctx.section("capacity") = {{"h", grid.spacing()},
                             {"phi", {{"centre", {origin[0], origin[1]}}, {"radius", 0.25 * min_side}}},
                             {"entries", rows}};
  ctx.table("capacity.csv", std::move(t));
}

void run_mollifier(Context& ctx) {
  const Scenario& s = ctx.scenario();
  const ExperimentSettings& ex = ctx.config().experiments;
  const CoefficientField field = make_field(s.field);
  const VectorField vf = make_row_field(field, ex.mollifier_row);
  const Mollifier mol = Mollifier::standard(s.dim());

  // Box around the test function wide enough for the coarsest kernel,
  // snapped to the grid spacing.
  const double r = ex.mollifier_resolution;
  const int min_n = *std::min_element(ex.mollifier_n.begin(), ex.mollifier_n.end());
  const double half = ex.mollifier_phi.width + 2.0 * mol.radius() / min_n;
  Box box{s.dim(), {0.0, 0.0}, {0.0, 0.0}};
  for (int k = 0; k < s.dim(); ++k) {
    box.lo[k] = std::floor((ex.mollifier_phi.centre[k] - half) * r) / r;
    box.hi[k] = std::ceil((ex.mollifier_phi.centre[k] + half) * r) / r;
  }
  const Grid grid(box, 1.0 / r);
  const ScalarFunction phi = functions::bump(s.dim(), ex.mollifier_phi.centre, ex.mollifier_phi.width);
  const auto entries = mollifier_commutator(vf, mol, grid, grid.sample(phi.value), ex.mollifier_n,
                                            {4096, ctx.config().seed});

  CsvTable t({"scenario", "n", "value", "bound", "ratio"});
  json rows = json::array();
  for (const auto& e : entries) {
    t.add({s.name, std::to_string(e.n), fmt(e.commutator), fmt(e.bound), fmt(e.ratio)});
    rows.push_back({{"n", e.n},
                    {"commutator", e.commutator},
                    {"phi_norm", e.phi_norm},
                    {"bound", e.bound},
                    {"ratio", e.ratio},
                    {"kernel_sum", e.kernel_sum}});
    ctx.summary("mollifier", "commutator_ratio_n=" + std::to_string(e.n), e.ratio, fmt(kBoundSlack),
                pass_fail(e.ratio <= kBoundSlack));
  }
  if (entries.size() >= 2) {
    const auto coarse = std::min_element(entries.begin(), entries.end(),
                                         [](const auto& a, const auto& b) { return a.n < b.n; });
    const auto fine = std::max_element(entries.begin(), entries.end(),
                                       [](const auto& a, const auto& b) { return a.n < b.n; });
    const double decay = coarse->commutator > 0.0 ? fine->commutator / coarse->commutator : 0.0;
    ctx.summary("mollifier",
                "commutator_decay_n=" + std::to_string(fine->n) + "/" + std::to_string(coarse->n), decay, "0.5",
                pass_fail(decay <= 0.5));
  }
  ctx.section("mollifier") = {{"h", grid.spacing()},
                              {"row", ex.mollifier_row},
                              {"box", {{"lo", {box.lo[0], box.lo[1]}}, {"hi", {box.hi[0], box.hi[1]}}}},
                              {"entries", rows}};
  ctx.table("mollifier.csv", std::move(t));
}

}  // namespace

RunOutcome run(const RunConfig& config) {
  RunOutcome out;
  out.report = {{"schema_version", kReportVersion},
                {"verb", verb_name(config.verb)},
                {"seed", config.seed},
                {"scenario", scenario_to_json(config.scenario)}};
  Context ctx(config, out);
  json errors = json::array();
  bool indeterminate = false;

  auto guarded = [&](const char* verb, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      errors.push_back({{"verb", verb}, {"message", e.what()}});
    }
  };

  const Verb v = config.verb;
  std::optional<InvarianceReport> inv;
  if (v == Verb::invariance || v == Verb::all) {
    guarded("invariance", [&] {
      inv = run_invariance(ctx);
      indeterminate = inv->semigroup == Verdict::indeterminate;
    });
  }
  if (v == Verb::flows || v == Verb::all) {
    guarded("flows", [&] {
      if (inv) {
        run_flows(ctx, inv->rows, inv->psi);
      } else {
        std::vector<EscapeEntry> rows;
        std::vector<EscapeEntry> psi;
        scenario_escapes(config.scenario, rows, psi);
        run_flows(ctx, rows, psi);
      }
    });
  }
  if (v == Verb::semigroup || v == Verb::all) guarded("semigroup", [&] { run_semigroup(ctx); });
  if (v == Verb::capacity || (v == Verb::all && make_domain(config.scenario.domain).chart())) {
    guarded("capacity", [&] { run_capacity(ctx); });
  }
  if (v == Verb::mollifier || v == Verb::all) guarded("mollifier", [&] { run_mollifier(ctx); });

  if (!errors.empty()) {
    out.exit_code = kExitComputation;
  } else if (indeterminate) {
    out.exit_code = kExitIndeterminate;
  }
  out.report["errors"] = errors;
  out.report["status"] = errors.empty() ? (indeterminate ? "indeterminate" : "ok") : "error";
  return out;
}

void write_outcome(const std::filesystem::path& dir, const RunOutcome& outcome) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, table] : outcome.tables) write_atomic(dir / name, table.str());
  write_atomic(dir / "summary.csv", summary_table(outcome.summary).str());
  write_atomic(dir / "report.json", outcome.report.dump(2) + "\n");
}

}  // namespace invlab::cli
