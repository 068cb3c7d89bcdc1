#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "invlab/analyzer.hpp"
#include "oracles.hpp"

namespace invlab {
namespace {

RefinementFit fitted(double order) {
  RefinementFit f;
  f.order = order;
  return f;
}

// --- verdict table ----------------------------------------------------------

TEST(SemigroupVerdict, DecisionTable) {
  const double tol = 0.01;
  RefinementFit converged;
  converged.converged = true;
  converged.order = std::nan("");
  EXPECT_EQ(semigroup_verdict(0.0, tol, converged), Verdict::holds);
  EXPECT_EQ(semigroup_verdict(0.005, tol, fitted(1.0)), Verdict::holds);
  EXPECT_EQ(semigroup_verdict(0.005, tol, fitted(2.5)), Verdict::holds);
  EXPECT_EQ(semigroup_verdict(0.005, tol, fitted(0.99)), Verdict::indeterminate);
  EXPECT_EQ(semigroup_verdict(0.005, tol, fitted(-0.3)), Verdict::indeterminate);
  EXPECT_EQ(semigroup_verdict(0.2, tol, fitted(0.0)), Verdict::fails);
  EXPECT_EQ(semigroup_verdict(0.2, tol, fitted(0.49)), Verdict::fails);
  EXPECT_EQ(semigroup_verdict(0.2, tol, fitted(0.5)), Verdict::indeterminate);
  EXPECT_EQ(semigroup_verdict(0.2, tol, fitted(1.5)), Verdict::indeterminate);
  EXPECT_EQ(semigroup_verdict(tol, tol, fitted(1.0)), Verdict::holds);
}

TEST(SemigroupVerdict, Names) {
  EXPECT_STREQ(verdict_name(Verdict::holds), "true");
  EXPECT_STREQ(verdict_name(Verdict::fails), "false");
  EXPECT_STREQ(verdict_name(Verdict::indeterminate), "indeterminate");
}

// --- refinement fit ---------------------------------------------------------

TEST(RefinementFitProperties, RecoversPowerLaws) {
  oracle::Generator gen(1);
  for (int trial = 0; trial < 200; ++trial) {
    const double order = gen.uniform(-1.0, 4.0);
    const double c = std::exp(gen.uniform(-5.0, 5.0));
    const int count = gen.integer(2, 6);
    std::vector<double> h;
    std::vector<double> leak;
    double step = gen.uniform(0.01, 0.1);
    for (int i = 0; i < count; ++i) {
      h.push_back(step);
      leak.push_back(c * std::pow(step, order));
      step *= gen.uniform(0.3, 0.8);
    }
    bool above_floor = true;
    for (double v : leak) above_floor = above_floor && v > kLeakageFloor;
    if (!above_floor) continue;
    const RefinementFit f = refinement_fit(h, leak);
    EXPECT_FALSE(f.converged);
    EXPECT_NEAR(f.order, order, 1e-9);
  }
}

TEST(RefinementFit, ConvergedWhenEverythingIsAtTheFloor) {
  const RefinementFit f = refinement_fit({0.1, 0.05, 0.025}, {0.0, 1e-15, 1e-14});
  EXPECT_TRUE(f.converged);
  EXPECT_TRUE(std::isnan(f.order));
  // One value above the floor is enough to fit.
  const RefinementFit g = refinement_fit({0.1, 0.05}, {1e-10, 0.0});
  EXPECT_FALSE(g.converged);
  EXPECT_NEAR(g.order, std::log2(1e-10 / kLeakageFloor), 1e-9);
}

TEST(RefinementFit, RejectsBadInput) {
  EXPECT_THROW(refinement_fit({0.1}, {0.01}), ValidationError);
  EXPECT_THROW(refinement_fit({0.1, 0.05}, {0.01}), ValidationError);
  EXPECT_THROW(refinement_fit({0.1, 0.1}, {0.01, 0.02}), ValidationError);
}

// --- scenarios --------------------------------------------------------------

TEST(Scenarios, BuiltinsValidate) {
  const auto names = scenarios::builtin_names();
  EXPECT_EQ(names.size(), 7u);
  for (const auto& n : names) {
    const Scenario s = scenarios::builtin(n);
    EXPECT_EQ(s.name, n);
    EXPECT_NO_THROW(s.validate()) << n;
    EXPECT_EQ(s.dim(), n.find("halfline") != std::string::npos ? 1 : 2) << n;
  }
  EXPECT_THROW(scenarios::builtin("nope"), ValidationError);
}

TEST(Scenarios, EquivalenceSuiteLeavesOutTheHeatCase) {
  const auto suite = scenarios::equivalence_suite();
  const std::set<std::string> got(suite.begin(), suite.end());
  const std::set<std::string> want{"rotation_disc",      "radial_disc",         "identity_disc",
                                   "delta_0.5_halfline", "delta_0.6_halfline", "delta_0.75_halfline"};
  EXPECT_EQ(got, want);
}

TEST(Scenarios, ValidationCatchesMistakes) {
  const Scenario base = scenarios::builtin("rotation_disc");
  auto expect_invalid = [](Scenario s, const char* why) { EXPECT_THROW(s.validate(), ValidationError) << why; };
  Scenario s = base;
  s.resolutions = {64};
  expect_invalid(s, "one resolution");
  s = base;
  s.resolutions = {64, 64.5};
  expect_invalid(s, "spacing does not divide the box");
  s = base;
  s.dt = 1.0;
  expect_invalid(s, "dt > t");
  s = base;
  s.hygiene_dt = 0.0;
  expect_invalid(s, "zero hygiene step");
  s = base;
  s.initial.kind = "square";
  expect_invalid(s, "unknown initial state");
  s = base;
  s.field = FieldSpec{"delta_family", {{"delta", 0.6}}, ""};
  expect_invalid(s, "1-D field on a 2-D box");
  s = base;
  s.flow_seeds = 0;
  expect_invalid(s, "no seeds");
  s = base;
  s.tol.escape = -1.0;
  expect_invalid(s, "negative tolerance");
  s = base;
  s.name.clear();
  expect_invalid(s, "no name");
}

TEST(Scenarios, InitialStates) {
  Scenario s = scenarios::builtin("heat_halfline");
  const ScalarFunction g = initial_state(s);
  const double mass = oracle::simpson([&](double x) { return g({x, 0.0}); }, -1.0, 3.0, 4000);
  EXPECT_NEAR(mass, 1.0, 1e-10);
  s = scenarios::builtin("rotation_disc");
  EXPECT_DOUBLE_EQ(initial_state(s)({0.5, 0.0}), 1.0);
  EXPECT_EQ(initial_state(s)({0.5, 0.41}), 0.0);
}

// --- runs -------------------------------------------------------------------

TEST(SemigroupRun, HeatLeakageMatchesTheClosedForm) {
  const Scenario s = scenarios::builtin("heat_halfline");
  const RunMetrics m = semigroup_run(s, 512, Scheme::crank_nicolson, 0.5, 1e-3);
  const double want = oracle::heat_leakage(0.1, 1.0, 0.5);
  EXPECT_NEAR(want, 0.1496, 1e-4);
  EXPECT_NEAR(m.leakage / want, 1.0, 0.02);
  EXPECT_LE(m.mass_drift, 1e-10);
}

TEST(SemigroupHygiene, DeltaFamily) {
  const Scenario s = scenarios::builtin("delta_0.6_halfline");
  const HygieneReport r = semigroup_hygiene(s, 512);
  EXPECT_LE(r.submarkov.mass_drift, 1e-10);
  EXPECT_LE(r.submarkov.linf_growth, 1.0 + 1e-10);
  EXPECT_LE(r.submarkov.positivity_violation, 1e-12);
  EXPECT_LE(r.self_adjoint_defect, 1e-10);
  EXPECT_LE(r.semigroup_defect, 1e-8);
}

TEST(Invariance, DeltaFamilyHoldsOnAllThreeFaces) {
  const InvarianceReport r = invariance_verdict(scenarios::builtin("delta_0.6_halfline"));
  EXPECT_EQ(r.flux_verdict, Verdict::holds);
  EXPECT_EQ(r.flows, Verdict::holds);
  EXPECT_EQ(r.semigroup, Verdict::holds);
  EXPECT_EQ(r.flows_rows, r.flows_psi);
  EXPECT_TRUE(r.equivalence);
  EXPECT_EQ(r.leakage.size(), 3u);
  EXPECT_DOUBLE_EQ(r.leak_tol, 10.0 / 512);
  EXPECT_LE(r.leakage.back().relative, 1e-3);
  EXPECT_TRUE(r.fit.converged || r.fit.order >= 1.0);
}

TEST(Invariance, IdentityFailsOnAllThreeFaces) {
  Scenario s = scenarios::builtin("identity_disc");
  s.resolutions = {32, 64};
  const InvarianceReport r = invariance_verdict(s);
  EXPECT_NEAR(r.flux.max, 1.0, 1e-12);
  EXPECT_EQ(r.flux_verdict, Verdict::fails);
  EXPECT_EQ(r.flows, Verdict::fails);
  EXPECT_EQ(r.flows_rows, Verdict::fails);
  EXPECT_EQ(r.flows_psi, Verdict::fails);
  EXPECT_EQ(r.semigroup, Verdict::fails);
  EXPECT_TRUE(r.equivalence);
  for (const auto& e : r.rows) EXPECT_GT(e.fraction, 0.1) << e.label;
}

TEST(Invariance, RotationEscapesAgree) {
  Scenario s = scenarios::builtin("rotation_disc");
  s.flow_seeds = 200;
  std::vector<EscapeEntry> rows;
  std::vector<EscapeEntry> psi;
  scenario_escapes(s, rows, psi);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_FALSE(psi.empty());
  for (const auto* list : {&rows, &psi}) {
    for (const auto& e : *list) {
      EXPECT_LE(e.fraction, 1e-3) << e.label;
      EXPECT_GE(e.fraction, std::max(e.forward, e.backward));
    }
  }
  EXPECT_LE(scenario_flux(s).max, 1e-12);
}

TEST(Invariance, WorkersDoNotChangeTheAnswer) {
  Scenario s = scenarios::builtin("identity_disc");
  s.flow_seeds = 100;
  std::vector<EscapeEntry> one_rows;
  std::vector<EscapeEntry> one_psi;
  scenario_escapes(s, one_rows, one_psi);
  s.workers = 3;
  std::vector<EscapeEntry> many_rows;
  std::vector<EscapeEntry> many_psi;
  scenario_escapes(s, many_rows, many_psi);
  ASSERT_EQ(one_rows.size(), many_rows.size());
  for (std::size_t i = 0; i < one_rows.size(); ++i) {
    EXPECT_EQ(one_rows[i].forward, many_rows[i].forward);
    EXPECT_EQ(one_rows[i].backward, many_rows[i].backward);
    EXPECT_EQ(one_rows[i].fraction, many_rows[i].fraction);
  }
  ASSERT_EQ(one_psi.size(), many_psi.size());
  for (std::size_t i = 0; i < one_psi.size(); ++i) EXPECT_EQ(one_psi[i].fraction, many_psi[i].fraction);
}

}  // namespace
}  // namespace invlab
