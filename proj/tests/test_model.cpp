#include "bilap/model.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace bilap {
namespace {

using std::numbers::pi;

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
  Eigen::MatrixXd A(2, 2);
  A << a, b, c, d;
  return A;
}

// Hand-derived C2 ball norm of z^T A z for a symmetric 2x2 A = [[a, b], [b, c]].
double quadratic_norm_oracle(double a, double b, double c, double r) {
  const double mid = 0.5 * (a + c), rad = std::hypot(0.5 * (a - c), b);
  const double spectral = std::max(std::abs(mid + rad), std::abs(mid - rad));
  const double rows = std::hypot(a, b) + std::hypot(b, c);
  return r * r * spectral + 2 * r * rows + 2 * (std::abs(a) + 2 * std::abs(b) + std::abs(c));
}

Nonlinearity reference_g() { return Nonlinearity::quadratic({mat2(1, 0.5, 0.5, 0.2), mat2(0.3, -0.4, -0.4, 1)}); }

// The same map as reference_g without the closed-form ball norm or vectorized path.
Nonlinearity opaque(const Nonlinearity& g) {
  return Nonlinearity(
      g.components(), [g](const Eigen::VectorXd& z) { return g.value(z); },
      [g](const Eigen::VectorXd& z) { return g.gradient(z); }, [g](const Eigen::VectorXd& z) { return g.hessian(z); });
}

VectorField gaussians(const Grid<double>& grid, int N, double amplitude = 1.0) {
  std::vector<RealField> c;
  for (int m = 0; m < N; ++m) c.push_back(gaussian_field(grid, {}, 1.0, amplitude).field);
  return VectorField(std::move(c));
}

TEST(C2Norm, ZeroNonlinearityIsZero) {
  EXPECT_EQ(c2_norm(Nonlinearity::zero(3), 2.0).value, 0.0);
}

TEST(C2Norm, ScalarSquareMatchesClosedForm) {
  const auto g = Nonlinearity::quadratic({Eigen::MatrixXd::Identity(1, 1)});
  for (double r : {0.0, 0.5, 1.0, 3.0}) {
    const auto n = c2_norm(g, r);
    EXPECT_EQ(n.method, C2Norm::Method::analytic);
    EXPECT_NEAR(n.value, r * r + 2 * r + 2, 1e-14);
  }
}

TEST(C2Norm, QuadraticPairMatchesHandDerivation) {
  const auto g = reference_g();
  for (double r : {0.1, 0.5, 2.0}) {
    const double expected = quadratic_norm_oracle(1, 0.5, 0.2, r) + quadratic_norm_oracle(0.3, -0.4, 1, r);
    EXPECT_NEAR(c2_norm(g, r).value, expected, 1e-13 * expected);
  }
}

TEST(C2Norm, NonSymmetricFormsAreSymmetrized) {
  const auto g = Nonlinearity::quadratic({mat2(1, 1.0, 0.0, 0.2), mat2(0.3, -0.8, 0.0, 1)});
  EXPECT_NEAR(c2_norm(g, 0.7).value, c2_norm(reference_g(), 0.7).value, 1e-14);
}

TEST(C2Norm, LinearMapMatchesClosedForm) {
  const auto g = Nonlinearity::linear(mat2(1, -2, 0, 3));
  const double r = 0.5;
  EXPECT_NEAR(c2_norm(g, r).value, r * (std::sqrt(5.0) + 3.0) + 6.0, 1e-14);
}

TEST(C2Norm, SamplingApproachesAnalyticFromBelow) {
  const auto g = reference_g();
  std::mt19937_64 rng(41);
  for (double r : {0.2, 1.0}) {
    const double exact = c2_norm(g, r).value;
    const auto sampled = sampled_c2_norm(g, r, 100000, rng);
    EXPECT_EQ(sampled.method, C2Norm::Method::sampled);
    EXPECT_EQ(sampled.sample_count, 100000);
    EXPECT_LE(sampled.value, exact * (1 + 1e-12));
    EXPECT_GE(sampled.value, 0.95 * exact);
  }
}

TEST(C2Norm, OpaqueNonlinearityFallsBackToSampling) {
  const auto n = c2_norm(opaque(reference_g()), 0.5, 1000, 3);
  EXPECT_EQ(n.method, C2Norm::Method::sampled);
  EXPECT_EQ(n.value, c2_norm(opaque(reference_g()), 0.5, 1000, 3).value);
}

TEST(C2NormProperty, MonotoneInRadius) {
  const auto g = reference_g();
  double previous = 0;
  for (double r = 0; r < 5; r += 0.25) {
    const double v = c2_norm(g, r).value;
    EXPECT_GE(v, previous);
    previous = v;
  }
}

TEST(C2NormProperty, ScalesLinearly) {
  const auto g = reference_g();
  EXPECT_NEAR(c2_norm(g.scaled(-0.25), 1.3).value, 0.25 * c2_norm(g, 1.3).value, 1e-14);
}

TEST(NonlinearityProperty, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal;
  for (const auto& g : {reference_g(), Nonlinearity::linear(mat2(1, -2, 0.5, 3))}) {
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXd z(2);
      z << normal(rng), normal(rng);
      const auto J = g.gradient(z);
      const double h = 1e-5;
      for (int n = 0; n < 2; ++n) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
        e[n] = h;
        const Eigen::VectorXd fd = (g.value(z + e) - g.value(z - e)) / (2 * h);
        for (int m = 0; m < 2; ++m) EXPECT_NEAR(J(m, n), fd[m], 1e-8 * (1 + std::abs(fd[m])));
      }
    }
  }
}

TEST(NonlinearityProperty, HessianMatchesFiniteDifferences) {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> normal;
  const auto g = reference_g();
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd z(2);
    z << normal(rng), normal(rng);
    const auto H = g.hessian(z);
    const double h = 1e-5;
    for (int l = 0; l < 2; ++l) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
      e[l] = h;
      const Eigen::MatrixXd fd = (g.gradient(z + e) - g.gradient(z - e)) / (2 * h);
      for (int m = 0; m < 2; ++m)
        for (int n = 0; n < 2; ++n) EXPECT_NEAR(H[m](n, l), fd(m, n), 1e-8 * (1 + std::abs(fd(m, n))));
    }
  }
}

TEST(Nonlinearity, FieldApplicationMatchesPointwiseEvaluation) {
  std::mt19937_64 rng(44);
  const Grid<double> g(2, 6, 1.0);
  const VectorField u({testing::random_field(g, rng), testing::random_field(g, rng)});
  for (const auto& nl : {reference_g(), Nonlinearity::linear(mat2(1, -2, 0.5, 3))}) {
    const auto fast = nl.apply(u);
    const auto slow = opaque(nl).apply(u);
    for (int m = 0; m < 2; ++m) EXPECT_LT((fast[m].values - slow[m].values).abs().maxCoeff(), 1e-13);
    Eigen::VectorXd z(2);
    z << u[0].values[7], u[1].values[7];
    EXPECT_NEAR(fast[1].values[7], nl.value(z)[1], 1e-13);
  }
}

TEST(Nonlinearity, DifferenceOfQuadraticsStaysAnalytic) {
  const auto g1 = reference_g();
  const auto g2 = g1.scaled(1.01);
  const auto diff = g1 - g2;
  ASSERT_TRUE(diff.analytic_ball_norm(0.5).has_value());
  EXPECT_NEAR(*diff.analytic_ball_norm(0.5), 0.01 * c2_norm(g1, 0.5).value, 1e-14);
  Eigen::VectorXd z(2);
  z << 0.3, -0.7;
  EXPECT_NEAR((diff.value(z) - (g1.value(z) - g2.value(z))).norm(), 0.0, 1e-15);
}

TEST(Nonlinearity, RejectsMalformedForms) {
  EXPECT_THROW(Nonlinearity::quadratic({}), ModelError);
  EXPECT_THROW(Nonlinearity::quadratic({Eigen::MatrixXd::Identity(3, 3)}), ModelError);
  EXPECT_THROW(Nonlinearity::linear(Eigen::MatrixXd(2, 3)), ModelError);
}

TEST(ValidateNonlinearity, IdentityFailsTheGradientCondition) {
  const auto r = validate_nonlinearity(Nonlinearity::linear(Eigen::MatrixXd::Identity(2, 2)), 0.5, 100.0);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.gradient_at_zero, 1.0);
  EXPECT_EQ(r.value_at_zero, 0.0);
}

TEST(ValidateNonlinearity, RejectsNormAboveM) {
  const double radius = 0.3;
  const auto g = reference_g();
  const double c2 = c2_norm(g, radius).value;
  const auto big = validate_nonlinearity(g, radius, 0.5 * c2);
  EXPECT_FALSE(big.pass);
  EXPECT_FALSE(big.in_ball_DM);

  const auto fitted = validate_nonlinearity(g.scaled(0.5 / c2), radius, 1.0);
  EXPECT_TRUE(fitted.pass);
  EXPECT_NEAR(fitted.c2.value, 0.5, 1e-14);
  EXPECT_TRUE(fitted.warnings.empty());
}

TEST(ValidateNonlinearity, ZeroMapIsTrivial) {
  const auto r = validate_nonlinearity(Nonlinearity::zero(2), 0.3, 1.0);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.nontrivial);
}

TEST(ValidateNonlinearity, SingleComponentWarns) {
  const auto g = Nonlinearity::quadratic({Eigen::MatrixXd::Identity(1, 1)}).scaled(0.1);
  const auto r = validate_nonlinearity(g, 0.2, 1.0);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(ValidateData, GaussianKernelsMatchClosedForms) {
  const Grid<double> grid(5, 16, 8.0);
  const Problem p(grid, {0.1, 0.1}, gaussians(grid, 2), gaussians(grid, 2), reference_g(), 1.0, 1.0);
  const auto r = validate_data_assumptions(p);
  EXPECT_TRUE(r.pass);
  const double H2 = 2 * std::pow(2 * pi, 5);     // 19585.26
  const double Q2 = 2 * std::pow(pi, 2.5);       // 34.9868
  EXPECT_NEAR(r.H2, H2, 1e-6 * H2);
  EXPECT_NEAR(r.Q2, Q2, 1e-3 * Q2);
  const auto meta = gaussian_field(grid, {}, 1.0, 1.0);
  EXPECT_NEAR(meta.l1 * meta.l1 * 2, H2, 1e-9 * H2);
  EXPECT_NEAR(meta.l2 * meta.l2 * 2, Q2, 1e-12 * Q2);
}

TEST(ValidateData, ZeroForcingsFail) {
  const Grid<double> grid(5, 6, 4.0);
  const Problem p(grid, {0.1, 0.1}, gaussians(grid, 2), VectorField(grid, 2), reference_g(), 1.0, 1.0);
  const auto r = validate_data_assumptions(p);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.forcing_nontrivial);
}

TEST(ValidateData, ZeroKernelsFail) {
  const Grid<double> grid(5, 6, 4.0);
  const Problem p(grid, {0.1, 0.1}, VectorField(grid, 2), gaussians(grid, 2), reference_g(), 1.0, 1.0);
  const auto r = validate_data_assumptions(p);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.H2, 0.0);
  EXPECT_EQ(r.failures.size(), 2u);
}

TEST(ValidateData, OneNontrivialForcingSuffices) {
  const Grid<double> grid(5, 6, 4.0);
  const VectorField f({gaussian_field(grid, {}, 1.0, 1.0).field, RealField(grid)});
  const Problem p(grid, {0.1, 0.1}, gaussians(grid, 2), f, reference_g(), 1.0, 1.0);
  EXPECT_TRUE(validate_data_assumptions(p).pass);
}

TEST(Problem, ChecksItsInputs) {
  const Grid<double> grid(5, 6, 4.0);
  const auto k = gaussians(grid, 2);
  const auto g = reference_g();
  EXPECT_THROW(Problem(Grid<double>(4, 6, 4.0), {0, 0}, VectorField(Grid<double>(4, 6, 4.0), 2),
                       VectorField(Grid<double>(4, 6, 4.0), 2), g, 1.0, 1.0),
               ModelError);
  EXPECT_THROW(Problem(grid, {0.1}, k, k, g, 1.0, 1.0), ModelError);
  EXPECT_THROW(Problem(grid, {0.1, -1}, k, k, g, 1.0, 1.0), ModelError);
  EXPECT_THROW(Problem(grid, {0.1, 0.1}, k, k, g, 1.5, 1.0), ModelError);
  EXPECT_THROW(Problem(grid, {0.1, 0.1}, k, k, g, 1.0, 0.0), ModelError);
  EXPECT_THROW(Problem(grid, {0.1, 0.1}, k, gaussians(grid, 3), g, 1.0, 1.0), ModelError);
  const Problem ok(grid, {0.1, 0.2}, k, k, g, 1.0, 1.0);
  EXPECT_EQ(ok.epsilon(), 0.2);
  EXPECT_EQ(ok.with_uniform_eps(0.05).eps(), (std::vector<double>{0.05, 0.05}));
}

TEST(GaussianField, RejectsNonPositiveWidth) {
  const Grid<double> grid(5, 6, 4.0);
  EXPECT_THROW(gaussian_field(grid, {}, 0.0, 1.0), ModelError);
  EXPECT_THROW(gaussian_field(grid, {}, -1.0, 1.0), ModelError);
  const std::vector<double> short_center = {1.0};
  EXPECT_THROW(gaussian_field(grid, short_center, 1.0, 1.0), ModelError);
}

TEST(GaussianField, ZeroAmplitudeIsZero) {
  const Grid<double> grid(5, 6, 4.0);
  const auto f = gaussian_field(grid, {}, 1.0, 0.0);
  EXPECT_EQ(norm_l1(f.field), 0.0);
  EXPECT_EQ(f.l1, 0.0);
}

TEST(BallRadius, ScalesWithNormPlusOne) {
  EXPECT_EQ(ball_radius_I(0.0, 0.5), 0.5);
  EXPECT_EQ(ball_radius_I(3.0, 0.25), 1.0);
  EXPECT_THROW(ball_radius_I(-1.0, 0.5), ModelError);
}

}  // namespace
}  // namespace bilap
