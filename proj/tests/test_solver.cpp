#include "bilap/solver.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace bilap {
namespace {

using std::numbers::pi;
using testing::reference_instance;
using testing::ReferenceInstance;

const ReferenceInstance& small_instance() {
  static const ReferenceInstance inst = reference_instance(8, 6.0);
  return inst;
}

double h4(const VectorField& u) { return norm_h4_vector(forward_transform(u)); }

TEST(SolveU0, ZeroForcingGivesZero) {
  const auto& base = small_instance().problem;
  const Problem p = base.with_forcings(VectorField(base.grid(), 2));
  double dropped = -1;
  EXPECT_EQ(h4(solve_u0(p, &dropped)), 0.0);
  EXPECT_EQ(dropped, 0.0);
}

TEST(SolveU0, InvertsTheOperatorOnMeanFreeData) {
  const auto& base = small_instance().problem;
  const auto& grid = base.grid();
  std::mt19937_64 rng(61);
  const auto w = random_h4_field(grid, 2, 1.0, rng);
  VectorField target = w;
  for (int m = 0; m < 2; ++m) target[m] = testing::mean_free(w[m]);
  const VectorField f({apply_operator(w[0]), apply_operator(w[1])});
  const auto u0 = solve_u0(base.with_forcings(f));
  EXPECT_LT(h4(u0 - target), 1e-10 * h4(target));
}

TEST(SolveU0, ConvergesUnderGridRefinement) {
  const auto coarse = reference_instance(10, 8.0, 0.0);
  const auto fine = reference_instance(12, 8.0, 0.0);
  EXPECT_NEAR(coarse.u0_h4, fine.u0_h4, 0.02 * fine.u0_h4);
}

TEST(FixedPointMap, VanishesWithoutCoupling) {
  const auto& inst = small_instance();
  const Problem p = inst.problem.with_uniform_eps(0.0);
  std::mt19937_64 rng(62);
  const auto v = random_h4_field(p.grid(), 2, 0.5, rng);
  EXPECT_EQ(h4(apply_T(p, inst.u0, v)), 0.0);
}

TEST(FixedPointMap, VanishesForZeroNonlinearity) {
  const auto& inst = small_instance();
  const Problem p = inst.problem.with_nonlinearity(Nonlinearity::zero(2));
  std::mt19937_64 rng(63);
  const auto v = random_h4_field(p.grid(), 2, 0.5, rng);
  EXPECT_EQ(h4(apply_T(p, inst.u0, v)), 0.0);
}

TEST(FixedPointMap, RatioForLinearCouplingMatchesSymbol) {
  // Delta kernel and g(z) = c z: T v1 - T v2 = eps c l^{-1}(v1 - v2), so a single
  // mode at |p| = 1 contracts by exactly eps c / (1 + 1).
  const Grid<double> grid(5, 6, pi);
  RealField delta(grid);
  const int origin[] = {3, 3, 3, 3, 3};
  delta.values[grid.linear_index(origin)] = 1.0 / grid.cell_volume();
  const double eps = 0.3, c = 0.8;
  const Problem p(grid, {eps}, VectorField({delta}), VectorField({gaussian_field(grid, {}, 1.0, 1.0).field}),
                  Nonlinearity::linear(Eigen::MatrixXd::Constant(1, 1, c)), 1.0, 1.0);
  const FixedPointMap map(p, solve_u0(p));
  std::mt19937_64 rng(64);
  const auto v1 = random_h4_field(grid, 1, 0.4, rng);
  const int k[] = {0, 0, 1, 0, 0};
  auto v2 = v1;
  v2[0] += 0.1 * testing::cosine_mode(grid, k);
  EXPECT_NEAR(contraction_ratio(map, v1, v2), eps * c / 2, 1e-12);

  // A mode with |p|^2 = 2 contracts by eps c / (2 + 4).
  const int k2[] = {1, 0, 0, -1, 0};
  auto v3 = v1;
  v3[0] += testing::cosine_mode(grid, k2);
  EXPECT_NEAR(contraction_ratio(map, v1, v3), eps * c / 6, 1e-12);
}

TEST(FixedPointMap, RejectPolicySurfacesTheZeroMode) {
  const auto& base = small_instance().problem;
  const auto& grid = base.grid();
  VectorField f = base.forcings();
  for (int m = 0; m < 2; ++m) f[m] = apply_operator(f[m]);
  const Problem p(grid, base.eps(), base.kernels(), f, base.nonlinearity(), base.rho(), base.M(),
                  {ZeroModePolicy::reject, 1e-8});
  VectorField u0(grid, 2);
  ASSERT_NO_THROW(u0 = solve_u0(p));
  EXPECT_THROW(apply_T(p, u0, VectorField(grid, 2)), ZeroModeRejected);
}

TEST(Residual, IsZeroForTheLinearProblemAndOneForZero) {
  const auto& inst = small_instance();
  const Problem p = inst.problem.with_uniform_eps(0.0);
  EXPECT_LT(residual(p, inst.u0), 1e-12);
  EXPECT_NEAR(residual(p, VectorField(p.grid(), 2)), 1.0, 1e-14);
}

TEST(Picard, WithoutCouplingReturnsBackground) {
  const auto& inst = small_instance();
  const Problem p = inst.problem.with_uniform_eps(0.0);
  const auto r = picard(p);
  EXPECT_TRUE(r.converged());
  EXPECT_EQ(r.trace.steps.size(), 1u);
  EXPECT_EQ(r.u_p_h4, 0.0);
  EXPECT_LT(h4(r.u - inst.u0), 1e-15);
  EXPECT_LT(r.residual, 1e-12);
}

TEST(Picard, ZeroForcingsGiveZeroSolutionAndNoBounds) {
  const auto& base = small_instance().problem;
  const Problem p = base.with_forcings(VectorField(base.grid(), 2));
  const auto r = picard(p);
  EXPECT_TRUE(r.converged());
  EXPECT_EQ(h4(r.u), 0.0);
  EXPECT_FALSE(r.bounds.has_value());
  ASSERT_EQ(r.warnings.size(), 1u);
}

TEST(Picard, ConvergesToAFixedPoint) {
  const auto& inst = small_instance();
  SolverOptions opt;
  const auto r = picard(inst.problem, inst.u0, inst.bounds, opt);
  ASSERT_TRUE(r.converged());
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_LT(r.residual, 1e-8);
  const double defect = h4(apply_T(inst.problem, inst.u0, r.u_p) - r.u_p);
  EXPECT_LE(defect, 10 * opt.tol * std::max(1.0, r.u_p_h4));
  EXPECT_TRUE(r.trace.all_in_ball());
  EXPECT_LE(r.u_p_h4, inst.bounds.apriori_up);
  EXPECT_LE(r.trace.asymptotic_ratio(), inst.bounds.contraction_constant + 0.05);
}

TEST(Picard, FixedPointIsIndependentOfTheStart) {
  const auto& inst = small_instance();
  const auto from_zero = picard(inst.problem, inst.u0, inst.bounds);
  std::mt19937_64 rng(65);
  for (int trial = 0; trial < 3; ++trial) {
    const auto start = random_h4_field(inst.problem.grid(), 2, 0.9 * inst.problem.rho(), rng);
    const auto r = picard(inst.problem, inst.u0, inst.bounds, {}, &start);
    ASSERT_TRUE(r.converged());
    EXPECT_LT(h4(r.u_p - from_zero.u_p), 1e-9);
  }
}

TEST(Picard, ReportsIterationBudgetExhaustion) {
  const auto& inst = small_instance();
  SolverOptions opt;
  opt.max_iter = 1;
  const auto r = picard(inst.problem, inst.u0, inst.bounds, opt);
  EXPECT_EQ(r.status, SolveStatus::max_iter_exceeded);
  EXPECT_STREQ(to_string(r.status), "MaxIterExceeded");
  EXPECT_EQ(r.trace.steps.size(), 1u);
}

TEST(Picard, LargeCouplingWarnsAndDiverges) {
  const auto& inst = small_instance();
  const Problem p = inst.problem.with_uniform_eps(1e4 * inst.bounds.eps_max);
  const auto r = picard(p, inst.u0, inst.bounds);
  EXPECT_FALSE(r.converged());
  EXPECT_EQ(r.status, SolveStatus::diverged);
  EXPECT_STREQ(to_string(r.status), "DivergenceDetected");
  ASSERT_FALSE(r.warnings.empty());
}

TEST(Picard, RejectsBadOptions) {
  const auto& inst = small_instance();
  SolverOptions opt;
  opt.tol = 0;
  EXPECT_THROW(picard(inst.problem, inst.u0, inst.bounds, opt), SolverError);
  opt.tol = 1e-10;
  opt.max_iter = 0;
  EXPECT_THROW(picard(inst.problem, inst.u0, inst.bounds, opt), SolverError);
}

TEST(IterationTrace, AsymptoticRatioUsesSecondHalf) {
  IterationTrace t;
  for (double r : {std::nan(""), 0.9, 0.8, 0.3, 0.2}) t.steps.push_back({0, 0, 0, r, 0, 0, true});
  EXPECT_EQ(t.asymptotic_ratio(), 0.3);
  EXPECT_TRUE(std::isnan(IterationTrace{}.asymptotic_ratio()));
}

TEST(RandomField, HasRequestedNormAndIsReproducible) {
  const Grid<double> grid(5, 6, 3.0);
  std::mt19937_64 a(66), b(66);
  const auto u = random_h4_field(grid, 2, 0.7, a);
  const auto v = random_h4_field(grid, 2, 0.7, b);
  EXPECT_NEAR(h4(u), 0.7, 1e-12);
  EXPECT_EQ(h4(u - v), 0.0);
}

TEST(ContractionProbe, RespectsTheContractionConstant) {
  const auto& inst = small_instance();
  const auto probe = contraction_probe(inst.problem, inst.u0, 10, 7);
  ASSERT_EQ(probe.ratios.size(), 10u);
  EXPECT_GT(probe.max_ratio, 0.0);
  EXPECT_LE(probe.max_ratio, inst.bounds.contraction_constant * 1.05);
  EXPECT_EQ(contraction_probe(inst.problem, inst.u0, 10, 7).ratios, probe.ratios);
}

TEST(ContractionProbe, VanishesWithoutCoupling) {
  const auto& inst = small_instance();
  const auto probe = contraction_probe(inst.problem.with_uniform_eps(0.0), inst.u0, 5, 8);
  EXPECT_EQ(probe.max_ratio, 0.0);
}

TEST(Continuity, IdenticalNonlinearitiesGiveIdenticalSolutions) {
  const auto& inst = small_instance();
  const auto& g = inst.problem.nonlinearity();
  const auto r = continuity_experiment(inst.problem, inst.u0, inst.bounds, g, g);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.g_gap, 0.0);
  EXPECT_EQ(r.bound, 0.0);
  EXPECT_EQ(r.measured, 0.0);
}

TEST(Continuity, PerturbedNonlinearityStaysWithinBound) {
  const auto& inst = small_instance();
  const auto& g1 = inst.problem.nonlinearity();
  std::vector<double> measured;
  for (double delta : {0.01, 0.1, 0.5}) {
    const auto r = continuity_experiment(inst.problem, inst.u0, inst.bounds, g1, g1.scaled(1 + delta));
    EXPECT_TRUE(r.assumptions_hold);
    EXPECT_TRUE(r.both_converged);
    EXPECT_GT(r.measured, 0.0);
    EXPECT_LE(r.measured, r.bound);
    EXPECT_EQ(r.gap_method, C2Norm::Method::analytic);
    EXPECT_TRUE(r.pass);
    measured.push_back(r.measured);
  }
  // The gap grows roughly linearly in delta: a tenfold delta gives 5x to 20x the gap.
  const double slope = measured[1] / measured[0];
  EXPECT_GT(slope, 5.0);
  EXPECT_LT(slope, 20.0);
}

TEST(Continuity, OutsideTheBallTheAssumptionsFail) {
  const auto& inst = small_instance();
  const auto& g1 = inst.problem.nonlinearity();
  const auto r = continuity_experiment(inst.problem, inst.u0, inst.bounds, g1, g1.scaled(3.0));
  EXPECT_FALSE(r.assumptions_hold);
  EXPECT_FALSE(r.pass);
}

}  // namespace
}  // namespace bilap
