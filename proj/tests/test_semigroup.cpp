#include <cmath>

#include <gtest/gtest.h>

#include "invlab/analyzer.hpp"
#include "invlab/semigroup.hpp"
#include "oracles.hpp"

namespace invlab {
namespace {

const Box kLine{1, {0.0, 0.0}, {1.0, 0.0}};
const Box kSquare{2, {-1.5, -1.5}, {1.5, 1.5}};

GridFunction random_function(const Grid& grid, oracle::Generator& gen) {
  GridFunction f(grid.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = gen.uniform(-1.0, 1.0);
  return f;
}

std::vector<CoefficientField> fields_2d() {
  return {fields::identity(2), fields::rotation(), fields::radial_disc(2.0), fields::radial_disc(1.0)};
}

std::vector<CoefficientField> fields_1d() {
  return {fields::identity(1), fields::delta_family(0.6), fields::scalar_1d("cosine"), fields::scalar_1d("abs")};
}

Box box_of(const CoefficientField& f) { return f.dim() == 1 ? Box{1, {-2.0, 0.0}, {2.0, 0.0}} : kSquare; }

// --- grid -----------------------------------------------------------------

TEST(Grid, CellCentredNodes) {
  const Grid g(Box{2, {0.0, -1.0}, {1.0, 1.0}}, 0.25);
  EXPECT_EQ(g.count(0), 4);
  EXPECT_EQ(g.count(1), 8);
  EXPECT_EQ(g.size(), 32);
  EXPECT_DOUBLE_EQ(g.coordinate(0, 0), 0.125);
  EXPECT_DOUBLE_EQ(g.coordinate(1, 7), 0.875);
  EXPECT_EQ(g.index(1, 2), 9);
  EXPECT_EQ(g.multi_index(9), (std::array<int, 2>{1, 2}));
  EXPECT_DOUBLE_EQ(g.weight(), 0.0625);
}

TEST(Grid, RejectsBadSpacings) {
  EXPECT_THROW(Grid(kLine, 0.3), ValidationError);
  EXPECT_THROW(Grid(kLine, 0.5), ValidationError);  // two cells
  EXPECT_THROW(Grid(kLine, -0.1), ValidationError);
  EXPECT_NO_THROW(Grid(kLine, 1.0 / 3.0));
}

TEST(Grid, NormsAndIntegrals) {
  const Grid g(Box{1, {0.0, 0.0}, {2.0, 0.0}}, 0.5);
  const GridFunction f = GridFunction::Constant(g.size(), 3.0);
  EXPECT_DOUBLE_EQ(integral(g, f), 6.0);
  EXPECT_DOUBLE_EQ(l2_norm(g, f), std::sqrt(18.0));
  GridFunction bad = f;
  bad[1] = NAN;
  EXPECT_THROW(g.check(bad, "test"), ValidationError);
  EXPECT_THROW(g.check(GridFunction::Zero(2), "test"), ValidationError);
}

// --- solver ---------------------------------------------------------------

TEST(Solver, PreconditionersAgree) {
  const Grid grid(kSquare, 3.0 / 64);
  const DiscreteOperator op = assemble(fields::rotation(), grid);
  SparseMatrix m(op.stiffness.rows(), op.stiffness.cols());
  m.setIdentity();
  m += 0.01 * op.stiffness;
  oracle::Generator gen(1);
  const GridFunction b = random_function(grid, gen);
  const SpdSolver jacobi(m, {1e-12, 0, Preconditioner::jacobi});
  const SpdSolver chol(m, {1e-12, 0, Preconditioner::cholesky});
  EXPECT_FALSE(jacobi.uses_cholesky());
  EXPECT_TRUE(chol.uses_cholesky());
  SolveStats sj;
  SolveStats sc;
  const GridFunction xj = jacobi.solve(b, {}, &sj);
  const GridFunction xc = chol.solve(b, {}, &sc);
  EXPECT_LE(sj.relative_residual, 1e-12);
  EXPECT_LE(sc.relative_residual, 1e-12);
  EXPECT_LE(sc.iterations, 3);
  EXPECT_LE((xj - xc).norm(), 1e-10 * xc.norm());
  EXPECT_LE((m * xj - b).norm(), 1e-12 * b.norm() * 1.01);
}

TEST(Solver, IterationCapRaises) {
  const Grid grid(kSquare, 3.0 / 64);
  const DiscreteOperator op = assemble(fields::identity(2), grid);
  SparseMatrix m(op.stiffness.rows(), op.stiffness.cols());
  m.setIdentity();
  m += op.stiffness;
  oracle::Generator gen(2);
  const SpdSolver s(m, {1e-12, 2, Preconditioner::jacobi});
  EXPECT_THROW(s.solve(random_function(grid, gen)), SolverError);
}

TEST(Solver, AutomaticThreshold) {
  SparseMatrix m(10, 10);
  m.setIdentity();
  EXPECT_FALSE(SpdSolver(m).uses_cholesky());
  EXPECT_TRUE(SpdSolver(m, {1e-12, 0, Preconditioner::automatic, 5}).uses_cholesky());
}

// --- assembly -------------------------------------------------------------

TEST(Assemble, OneDimensionalLaplacianStencil) {
  const Grid grid(kLine, 0.1);
  const DiscreteOperator op = assemble(fields::identity(1), grid);
  for (int i = 1; i + 1 < grid.count(0); ++i) {
    EXPECT_NEAR(op.stiffness.coeff(i, i - 1), -100.0, 1e-9);
    EXPECT_NEAR(op.stiffness.coeff(i, i), 200.0, 1e-9);
    EXPECT_NEAR(op.stiffness.coeff(i, i + 1), -100.0, 1e-9);
  }
}

TEST(Assemble, UnitVectorFormValue) {
  const Grid grid(kLine, 0.1);
  const DiscreteOperator op = assemble(fields::identity(1), grid);
  GridFunction e = GridFunction::Zero(grid.size());
  e[4] = 1.0;
  EXPECT_NEAR(e.dot(op.stiffness * e), 200.0, 1e-9);
  EXPECT_NEAR(form_value(op, e, e), 20.0, 1e-10);
}

TEST(Assemble, FivePointStencilForTheIdentity) {
  const double h = 0.1;
  const Grid grid(Box{2, {0.0, 0.0}, {1.0, 1.0}}, h);
  const DiscreteOperator op = assemble(fields::identity(2), grid);
  const Eigen::Index p = grid.index(4, 5);
  const double s = 1.0 / (h * h);
  EXPECT_NEAR(op.stiffness.coeff(p, p), 4.0 * s, 1e-8);
  EXPECT_NEAR(op.stiffness.coeff(p, grid.index(3, 5)), -s, 1e-8);
  EXPECT_NEAR(op.stiffness.coeff(p, grid.index(5, 5)), -s, 1e-8);
  EXPECT_NEAR(op.stiffness.coeff(p, grid.index(4, 4)), -s, 1e-8);
  EXPECT_NEAR(op.stiffness.coeff(p, grid.index(4, 6)), -s, 1e-8);
  EXPECT_EQ(op.stiffness.coeff(p, grid.index(5, 6)), 0.0);
  EXPECT_EQ(op.stiffness.row(p).nonZeros() <= 9, true);
}

TEST(Assemble, ErrorsOnMismatchAndNaN) {
  EXPECT_THROW(assemble(fields::identity(2), Grid(kLine, 0.1)), ValidationError);
  const CoefficientField nan_field(1, "nan", [](const Vec&) { return Mat{Vec{NAN, 0.0}, Vec{0.0, 0.0}}; }, {});
  EXPECT_THROW(assemble(nan_field, Grid(kLine, 0.1)), ValidationError);
}

TEST(AssembleProperties, ExactlySymmetric) {
  for (const CoefficientField& f : {fields::rotation(), fields::radial_disc(2.0), fields::delta_family(0.75)}) {
    const Grid grid(box_of(f), f.dim() == 1 ? 1.0 / 64 : 3.0 / 48);
    const DiscreteOperator op = assemble(f, grid);
    const SparseMatrix t = op.stiffness.transpose();
    EXPECT_EQ((op.stiffness - t).norm(), 0.0) << f.name();
  }
}

TEST(AssembleProperties, PositiveSemidefiniteOnRandomVectors) {
  oracle::Generator gen(3);
  for (const auto& list : {fields_1d(), fields_2d()}) {
    for (const CoefficientField& f : list) {
      const Grid grid(box_of(f), f.dim() == 1 ? 1.0 / 64 : 3.0 / 48);
      const DiscreteOperator op = assemble(f, grid);
      for (int trial = 0; trial < 50; ++trial) {
        const GridFunction phi = random_function(grid, gen);
        EXPECT_GE(phi.dot(op.stiffness * phi), -1e-12 * phi.squaredNorm()) << f.name();
      }
    }
  }
}

TEST(AssembleProperties, InteriorRowSumsVanish) {
  for (const auto& list : {fields_1d(), fields_2d()}) {
    for (const CoefficientField& f : list) {
      const Grid grid(box_of(f), f.dim() == 1 ? 1.0 / 64 : 3.0 / 48);
      const DiscreteOperator op = assemble(f, grid);
      const GridFunction ones = GridFunction::Ones(grid.size());
      const GridFunction sums = op.stiffness * ones;
      double scale = op.stiffness.diagonal().cwiseAbs().maxCoeff();
      for (Eigen::Index p = 0; p < grid.size(); ++p) {
        const auto ij = grid.multi_index(p);
        bool interior = true;
        for (int k = 0; k < grid.dim(); ++k) interior = interior && ij[k] > 0 && ij[k] + 1 < grid.count(k);
        if (interior) ASSERT_LE(std::fabs(sums[p]), 1e-12 * scale) << f.name();
      }
    }
  }
}

// --- form value -----------------------------------------------------------

TEST(FormValue, ConstantsAreInTheKernelAwayFromTheEdge) {
  for (const CoefficientField& f : fields_2d()) {
    const Grid grid(kSquare, 3.0 / 48);
    const DiscreteOperator op = assemble(f, grid);
    const GridFunction one = GridFunction::Ones(grid.size());
    GridFunction psi = grid.sample(functions::bump(2, {0.1, 0.2}, 1.0).value);
    EXPECT_NEAR(form_value(op, one, psi), 0.0, 1e-12) << f.name();
  }
}

TEST(FormValue, WindowedLinearFunctionMatchesTheIntegral) {
  // phi(x) = x B(x / R) with the bump B; oracle for int |phi'|^2.
  const double R = 1.5;
  auto phi = [R](double x) { return x * oracle::bump(x * x / (R * R)); };
  auto dphi = [R](double x) {
    const double r2 = x * x / (R * R);
    if (r2 >= 1.0) return 0.0;
    const double b = oracle::bump(r2);
    return b + x * b * (-2.0 * x / (R * R)) / ((1.0 - r2) * (1.0 - r2));
  };
  const double exact = oracle::simpson([&](double x) { return dphi(x) * dphi(x); }, -R, R, 200000);
  std::vector<double> err;
  for (double h : {1.0 / 64, 1.0 / 128, 1.0 / 256}) {
    const Grid grid(Box{1, {-2.0, 0.0}, {2.0, 0.0}}, h);
    const DiscreteOperator op = assemble(fields::identity(1), grid);
    const GridFunction u = grid.sample([&](const Vec& x) { return phi(x[0]); });
    err.push_back(std::fabs(form_value(op, u, u) - exact));
  }
  EXPECT_LE(err.back(), 1e-3 * exact);
  EXPECT_GE(err[0] / err[1], 3.5);
  EXPECT_GE(err[1] / err[2], 3.5);
}

TEST(FormValueProperties, CauchySchwarz) {
  oracle::Generator gen(4);
  for (const auto& list : {fields_1d(), fields_2d()}) {
    for (const CoefficientField& f : list) {
      const Grid grid(box_of(f), f.dim() == 1 ? 1.0 / 64 : 3.0 / 48);
      const DiscreteOperator op = assemble(f, grid);
      for (int trial = 0; trial < 30; ++trial) {
        const GridFunction a = random_function(grid, gen);
        const GridFunction b = random_function(grid, gen);
        const double ab = form_value(op, a, b);
        EXPECT_EQ(ab, form_value(op, b, a));
        EXPECT_LE(std::fabs(ab), std::sqrt(form_value(op, a, a) * form_value(op, b, b)) + 1e-12) << f.name();
      }
    }
  }
}

TEST(FormValueProperties, Locality) {
  oracle::Generator gen(5);
  for (const CoefficientField& f : fields_2d()) {
    const Grid grid(kSquare, 3.0 / 48);
    const DiscreteOperator op = assemble(f, grid);
    for (int trial = 0; trial < 20; ++trial) {
      // Random supports in the left and right thirds, with a gap of
      // at least two cells between them.
      const int split = gen.integer(10, 30);
      GridFunction a = GridFunction::Zero(grid.size());
      GridFunction b = GridFunction::Zero(grid.size());
      for (Eigen::Index p = 0; p < grid.size(); ++p) {
        const int i = grid.multi_index(p)[0];
        if (i < split) a[p] = gen.uniform(-1.0, 1.0);
        if (i > split + 1) b[p] = gen.uniform(-1.0, 1.0);
      }
      EXPECT_EQ(form_value(op, a, b), 0.0) << f.name();
    }
  }
}

// --- carre du champ -------------------------------------------------------

TEST(CarreDuChamp, CoordinateUnderTheIdentity) {
  const Box window{2, {-0.5, -0.5}, {0.5, 0.5}};
  const ScalarFunction x1 = functions::windowed(functions::coordinate(2, 0), window, 0.5);
  const Grid grid(kSquare, 3.0 / 96);
  const GridFunction u = grid.sample(x1.value);
  const GridFunction gamma = carre_du_champ(fields::identity(2), grid, u, u);
  for (Eigen::Index p = 0; p < grid.size(); ++p) {
    const Vec x = grid.node(p);
    if (window.contains(x)) ASSERT_NEAR(gamma[p], 1.0, 1e-12);
  }
}

TEST(CarreDuChampProperties, NonnegativeOnTheDiagonal) {
  oracle::Generator gen(6);
  for (const auto& list : {fields_1d(), fields_2d()}) {
    for (const CoefficientField& f : list) {
      const Grid grid(box_of(f), f.dim() == 1 ? 1.0 / 64 : 3.0 / 48);
      for (int trial = 0; trial < 10; ++trial) {
        const GridFunction a = random_function(grid, gen);
        EXPECT_GE(carre_du_champ(f, grid, a, a).minCoeff(), -1e-12) << f.name();
      }
    }
  }
}

// Smooth windowed triple with random parameters.
struct Triple {
  ScalarFunction tau;
  ScalarFunction psi;
  ScalarFunction phi;
};

Triple random_triple(oracle::Generator& gen) {
  const double a = gen.uniform(0.5, 2.0);
  const double b = gen.uniform(-1.0, 1.0);
  const Vec c1{gen.uniform(-0.3, 0.3), gen.uniform(-0.3, 0.3)};
  const Vec c2{gen.uniform(-0.3, 0.3), gen.uniform(-0.3, 0.3)};
  Triple t;
  t.tau = functions::bump(2, c1, gen.uniform(0.7, 1.0));
  t.psi = from_generic("psi", 2, [a, b](const auto& x) {
    using std::sin;
    return sin(a * x[0] + b * x[1]) * bump_profile(x, Vec{0.0, 0.0}, 1.2, 2);
  });
  t.phi = functions::product(functions::bump(2, c2, 1.1), functions::coordinate(2, 1));
  return t;
}

TEST(CarreDuChampProperties, L1BoundByTheForms) {
  oracle::Generator gen(7);
  for (const CoefficientField& f : fields_2d()) {
    for (int trial = 0; trial < 5; ++trial) {
      const Triple t = random_triple(gen);
      const double h = 3.0 / 96;
      const Grid grid(kSquare, h);
      const DiscreteOperator op = assemble(f, grid);
      const GridFunction a = grid.sample(t.psi.value);
      const GridFunction b = grid.sample(t.phi.value);
      const double l1 = carre_du_champ(f, grid, a, b).cwiseAbs().sum() * grid.weight();
      const double bound = std::sqrt(form_value(op, a, a) * form_value(op, b, b));
      EXPECT_LE(l1, bound * (1.0 + h)) << f.name();
    }
  }
}

double identity_defect(const CoefficientField& f, const Triple& t, double h) {
  const Grid grid(kSquare, h);
  const DiscreteOperator op = assemble(f, grid);
  const GridFunction tau = grid.sample(t.tau.value);
  const GridFunction psi = grid.sample(t.psi.value);
  const GridFunction phi = grid.sample(t.phi.value);
  const double lhs = tau.dot(carre_du_champ(f, grid, psi, phi)) * grid.weight();
  const double rhs = 0.5 * (form_value(op, tau.cwiseProduct(psi), phi) + form_value(op, psi, tau.cwiseProduct(phi)) -
                            form_value(op, tau, psi.cwiseProduct(phi)));
  return std::fabs(lhs - rhs);
}

TEST(CarreDuChampProperties, ProductIdentityConvergesAtSecondOrder) {
  oracle::Generator gen(8);
  for (const CoefficientField& f : {fields::identity(2), fields::rotation(), fields::radial_disc(2.0)}) {
    for (int trial = 0; trial < 3; ++trial) {
      const Triple t = random_triple(gen);
      const double e1 = identity_defect(f, t, 3.0 / 64);
      const double e2 = identity_defect(f, t, 3.0 / 128);
      const double e3 = identity_defect(f, t, 3.0 / 256);
      const double order = std::log2(e1 / e3) / 2.0;
      EXPECT_GE(order, 1.8) << f.name() << " " << e1 << " " << e2 << " " << e3;
    }
  }
}

// --- evolution ------------------------------------------------------------

TEST(Evolve, HeatKernelPeak) {
  const Grid grid(Box{1, {-2.0, 0.0}, {2.0, 0.0}}, 1.0 / 1024);
  const DiscreteOperator op = assemble(fields::identity(1), grid);
  const GridFunction u0 = grid.sample(functions::gaussian(1, {0.0, 0.0}, 0.1).value);
  const GridFunction u = evolve(op, u0, 0.005, 1e-4, Scheme::crank_nicolson);
  const double want = oracle::heat_peak(0.1, 0.005);
  EXPECT_NEAR(want, 2.8209, 1e-4);
  EXPECT_NEAR(u.maxCoeff() / want, 1.0, 1e-3);
  EXPECT_NEAR(integral(grid, u), integral(grid, u0), 1e-10);
}

TEST(Evolve, MassIsConserved) {
  for (const CoefficientField& f : fields_2d()) {
    const Grid grid(kSquare, 3.0 / 96);
    const DiscreteOperator op = assemble(f, grid);
    const GridFunction u0 = grid.sample(functions::bump(2, {0.2, 0.1}, 0.5).value);
    // Short horizon: at t = 0.01 with dt = 1e-3 the identity field already
    // puts about 1e-9 of the mass on the box edge.
    for (Scheme s : {Scheme::crank_nicolson, Scheme::backward_euler}) {
      const GridFunction u = evolve(op, u0, 0.002, 2e-4, s);
      EXPECT_NEAR(integral(grid, u), integral(grid, u0), 1e-10) << f.name();
    }
  }
}

TEST(Evolve, ShortTimeLimit) {
  const Grid grid(kSquare, 3.0 / 96);
  const DiscreteOperator op = assemble(fields::rotation(), grid);
  const GridFunction u0 = grid.sample(functions::bump(2, {0.2, 0.1}, 0.5).value);
  const GridFunction u = evolve(op, u0, 1e-8, 1e-8, Scheme::crank_nicolson);
  EXPECT_LE((u - u0).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(Evolve, ZeroFieldIsFrozen) {
  const Grid grid(kSquare, 3.0 / 48);
  const DiscreteOperator op = assemble(fields::zero(2), grid);
  const GridFunction u0 = grid.sample(functions::bump(2, {0.2, 0.1}, 0.5).value);
  EXPECT_EQ(evolve(op, u0, 0.5, 0.05, Scheme::backward_euler), u0);
  const SubmarkovReport r = submarkov_report(op, u0, 0.5, 0.05);
  EXPECT_EQ(r.positivity_violation, 0.0);
  EXPECT_EQ(r.linf_growth, 1.0);
}

TEST(Evolve, RejectsBadTimes) {
  const Grid grid(kLine, 0.1);
  const DiscreteOperator op = assemble(fields::identity(1), grid);
  const GridFunction u0 = GridFunction::Ones(grid.size());
  EXPECT_THROW(evolve(op, u0, 0.0, 0.1, Scheme::crank_nicolson), ValidationError);
  EXPECT_THROW(evolve(op, u0, 0.1, 0.2, Scheme::crank_nicolson), ValidationError);
  EXPECT_THROW(submarkov_report(op, -u0, 0.1, 0.1), ValidationError);
  EXPECT_EQ(step_count(0.5, 0.025), 20);
  EXPECT_EQ(step_count(0.5, 0.03), 17);
}

TEST(EvolveProperties, SemigroupAndSelfAdjointness) {
  oracle::Generator gen(9);
  for (const CoefficientField& f : {fields::rotation(), fields::radial_disc(2.0), fields::delta_family(0.6)}) {
    const Grid grid(box_of(f), f.dim() == 1 ? 1.0 / 128 : 3.0 / 96);
    const DiscreteOperator op = assemble(f, grid);
    for (int trial = 0; trial < 3; ++trial) {
      const Vec c = f.dim() == 1 ? Vec{gen.uniform(-0.5, 0.5), 0.0} : gen.in_disc(0.5);
      const GridFunction u = grid.sample(functions::bump(f.dim(), c, 0.5).value);
      const GridFunction v = random_function(grid, gen);
      for (Scheme s : {Scheme::crank_nicolson, Scheme::backward_euler}) {
        const double dt = 1e-3;
        const GridFunction whole = evolve(op, u, 0.02, dt, s);
        const GridFunction split = evolve(op, evolve(op, u, 0.008, dt, s), 0.012, dt, s);
        EXPECT_LE(l2_norm(grid, whole - split), 1e-8) << f.name();
        const double lhs = evolve(op, u, 0.01, dt, s).dot(v) * grid.weight();
        const double rhs = u.dot(evolve(op, v, 0.01, dt, s)) * grid.weight();
        EXPECT_NEAR(lhs, rhs, 1e-10) << f.name();
      }
    }
  }
}

// --- submarkovian behaviour -----------------------------------------------

TEST(Submarkov, AxisAlignedStencilsArePositive) {
  // M-matrix stencils: 1-D fields and diagonal C.
  std::vector<CoefficientField> list = fields_1d();
  list.push_back(fields::identity(2));
  list.push_back(fields::radial_disc(2.0));
  for (const CoefficientField& f : list) {
    const Grid grid(box_of(f), f.dim() == 1 ? 1.0 / 128 : 3.0 / 96);
    const DiscreteOperator op = assemble(f, grid);
    const GridFunction u0 = grid.sample(functions::bump(f.dim(), {0.3, 0.0}, 0.5).value);
    const SubmarkovReport r = submarkov_report(op, u0, 0.01, 1e-3);
    EXPECT_LE(r.positivity_violation, 1e-12) << f.name();
    EXPECT_LE(r.linf_growth, 1.0 + 1e-10) << f.name();
    EXPECT_LE(r.l1_growth, 1.0 + 1e-10) << f.name();
  }
}

TEST(Submarkov, RotationStencilIsNotAnMMatrix) {
  // The mixed term c12 = -x1 x2 produces positive off-diagonal entries, so
  // backward Euler is not guaranteed positive for this field.
  const Grid grid(kSquare, 3.0 / 96);
  const DiscreteOperator op = assemble(fields::rotation(), grid);
  int positive_off_diagonal = 0;
  for (Eigen::Index r = 0; r < op.stiffness.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(op.stiffness, r); it; ++it) {
      if (it.col() != r && it.value() > 1e-12) ++positive_off_diagonal;
    }
  }
  EXPECT_GT(positive_off_diagonal, 0);
  const GridFunction u0 = grid.sample(functions::bump(2, {0.5, 0.0}, 0.4).value);
  const SubmarkovReport r = submarkov_report(op, u0, 0.002, 2e-4);
  EXPECT_LE(r.linf_growth, 1.0 + 1e-10);
  EXPECT_LE(r.mass_drift, 1e-10);
}

// --- leakage --------------------------------------------------------------

TEST(Leakage, HeatOnTheHalfLine) {
  const Grid grid(Box{1, {-8.0, 0.0}, {8.0, 0.0}}, 1.0 / 512);
  const DiscreteOperator op = assemble(fields::scalar_1d("constant"), grid);
  const GridFunction u0 = grid.sample(functions::gaussian(1, {1.0, 0.0}, 0.1).value);
  const double got = leakage(op, domains::halfline(8.0), u0, 0.5, 1e-3, Scheme::crank_nicolson);
  const double want = oracle::heat_leakage(0.1, 1.0, 0.5);
  EXPECT_NEAR(want, 0.1496, 1e-4);
  EXPECT_NEAR(got / want, 1.0, 0.02);
}

TEST(Leakage, DeltaFamilyStaysInside) {
  std::vector<double> hs;
  std::vector<double> leaks;
  for (int p : {8, 9, 10}) {
    const double h = std::ldexp(1.0, -p);
    const Grid grid(Box{1, {-4.0, 0.0}, {4.0, 0.0}}, h);
    const DiscreteOperator op = assemble(fields::delta_family(0.6), grid);
    const GridFunction u0 = grid.sample(functions::bump(1, {1.0, 0.0}, 0.5).value);
    hs.push_back(h);
    leaks.push_back(leakage(op, domains::halfline(), u0, 0.5, 1e-3));
  }
  EXPECT_LE(leaks.back(), 1e-3);
  const RefinementFit fit = refinement_fit(hs, leaks);
  EXPECT_TRUE(fit.converged || fit.order >= 1.0);
}

TEST(Leakage, RotationStaysInside) {
  std::vector<double> hs;
  std::vector<double> leaks;
  for (double r : {64.0, 128.0, 256.0}) {
    const Grid grid(kSquare, 1.0 / r);
    const DiscreteOperator op = assemble(fields::rotation(), grid);
    const GridFunction u0 = grid.sample(functions::bump(2, {0.5, 0.0}, 0.4).value);
    hs.push_back(1.0 / r);
    leaks.push_back(leakage(op, domains::disc(), u0, 0.5, 0.025));
  }
  EXPECT_LE(leaks.back(), 1e-3);
  EXPECT_LT(leaks[2], leaks[1]);
  EXPECT_LT(leaks[1], leaks[0]);
}

TEST(Leakage, ReportCarriesTheState) {
  const Grid grid(Box{1, {-4.0, 0.0}, {4.0, 0.0}}, 1.0 / 64);
  const DiscreteOperator op = assemble(fields::identity(1), grid);
  const GridFunction u0 = grid.sample(functions::bump(1, {0.5, 0.0}, 0.4).value);
  const LeakageResult r = leakage_report(op, domains::halfline(), u0, 0.1, 0.01);
  EXPECT_GT(r.absolute, 0.0);
  EXPECT_NEAR(r.relative, r.absolute / l2_norm(grid, r.state), 1e-15);
  EXPECT_EQ(r.absolute, leakage(op, domains::halfline(), u0, 0.1, 0.01));
}

}  // namespace
}  // namespace invlab
