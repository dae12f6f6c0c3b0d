#pragma once

// Shared fixtures for the test suites.

#include "bilap/model.hpp"
#include "bilap/solver.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace bilap::testing {

inline RealField random_field(const Grid<double>& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  RealField f(grid);
  for (Eigen::Index i = 0; i < grid.size(); ++i) f.values[i] = normal(rng);
  return f;
}

inline RealField mean_free(RealField f) {
  f.values -= f.values.mean();
  return f;
}

/// cos(p_k . x) for the lattice frequency with integer index k.
inline RealField cosine_mode(const Grid<double>& grid, std::span<const int> k) {
  const double dp = grid.frequency_spacing();
  return sample(grid, [&](std::span<const double> x) {
    double phase = 0;
    for (int a = 0; a < grid.dim(); ++a) phase += dp * k[a] * x[a];
    return std::cos(phase);
  });
}

/// Storage index of the frequency index k.
inline Eigen::Index storage_index(const Grid<double>& grid, std::span<const int> k) {
  std::vector<int> digits(grid.dim());
  for (int a = 0; a < grid.dim(); ++a) digits[a] = (k[a] + grid.points()) % grid.points();
  return grid.linear_index(digits);
}

/// The shipped reference instance (configs/d5_n2.json): two components, d = 5,
/// Gaussian kernels and forcings of width 1.5 and 1.8, and a
/// quadratic nonlinearity scaled so that ||g||_C2(I) = fraction * M.
struct ReferenceInstance {
  Problem problem;
  VectorField u0;
  double u0_h4;
  BoundsReport bounds;
};

inline ReferenceInstance reference_instance(int n = 12, double L = 8.0, double eps_fraction = 0.5,
                                            double g_fraction = 0.5) {
  const Grid<double> grid(5, n, L);
  const std::vector<double> shifted = {0.5, 0.0, 0.0, 0.0, 0.0};
  VectorField kernels({gaussian_field(grid, {}, 1.5, 1.0).field, gaussian_field(grid, {}, 1.5, 1.0).field});
  VectorField forcings({gaussian_field(grid, {}, 1.5, 1.0).field, gaussian_field(grid, shifted, 1.8, 0.5).field});
  Eigen::MatrixXd A1(2, 2), A2(2, 2);
  A1 << 1.0, 0.5, 0.5, 0.2;
  A2 << 0.3, -0.4, -0.4, 1.0;
  const Nonlinearity g = Nonlinearity::quadratic({A1, A2});
  Problem p(grid, {0.0, 0.0}, kernels, forcings, g, 1.0, 1.0);

  VectorField u0 = solve_u0(p);
  const double u0_h4 = norm_h4_vector(forward_transform(u0));
  const double radius = ball_radius_I(u0_h4, sobolev_constant(5));
  const double scale = g_fraction * p.M() / *g.analytic_ball_norm(radius);
  p = p.with_nonlinearity(g.scaled(scale));
  p = p.with_uniform_eps(eps_fraction * epsilon_max(p, u0_h4));
  return {p, std::move(u0), u0_h4, compute_bounds(p, u0_h4)};
}

}  // namespace bilap::testing
