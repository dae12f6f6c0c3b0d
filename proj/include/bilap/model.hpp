#pragma once

// Problem instances: kernels H_m, forcings f_m, couplings eps_m, the
// nonlinearity g : R^N -> R^N, and the validators for the data assumptions
// (integrable nontrivial forcings and kernels; g in the C^2 ball D_M with
// g(0) = 0, grad g(0) = 0).

#include "bilap/lattice.hpp"
#include "bilap/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace bilap {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// g : R^N -> R^N together with its first and second partial derivatives.
///
/// The quadratic family g_m(z) = z^T A_m z and the linear family g(z) = B z
/// carry closed forms for the C^2 ball norm and a vectorized field path;
/// anything else is evaluated point by point.
class Nonlinearity {
 public:
  using Point = Eigen::VectorXd;
  using ValueFn = std::function<Eigen::VectorXd(const Point&)>;
  /// (m, n) entry is dg_m / dz_n.
  using GradientFn = std::function<Eigen::MatrixXd(const Point&)>;
  /// Entry m is the N x N Hessian of g_m.
  using HessianFn = std::function<std::vector<Eigen::MatrixXd>(const Point&)>;
  /// r -> exact ||g||_{C2} over the closed ball of radius r.
  using BallNormFn = std::function<double(double)>;

  Nonlinearity(int components, ValueFn value, GradientFn gradient, HessianFn hessian,
               BallNormFn ball_norm = {});

  /// g_m(z) = z^T A_m z; each A_m is symmetrized.
  static Nonlinearity quadratic(std::vector<Eigen::MatrixXd> forms);
  /// g(z) = B z. Violates grad g(0) = 0; used to probe the map with a known Lipschitz constant.
  static Nonlinearity linear(Eigen::MatrixXd matrix);
  static Nonlinearity zero(int components);

  int components() const { return components_; }
  Eigen::VectorXd value(const Point& z) const { return value_(z); }
  Eigen::MatrixXd gradient(const Point& z) const { return gradient_(z); }
  std::vector<Eigen::MatrixXd> hessian(const Point& z) const { return hessian_(z); }
  std::optional<double> analytic_ball_norm(double radius) const;

  const std::optional<std::vector<Eigen::MatrixXd>>& quadratic_forms() const { return quadratic_; }
  const std::optional<Eigen::MatrixXd>& linear_matrix() const { return linear_; }

  Nonlinearity scaled(double factor) const;

  /// Pointwise G_m(x) = g_m(u(x)).
  VectorField apply(const VectorField& u) const;

  friend Nonlinearity operator-(const Nonlinearity& a, const Nonlinearity& b);

 private:
  int components_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
  BallNormFn ball_norm_;
  std::optional<std::vector<Eigen::MatrixXd>> quadratic_;
  std::optional<Eigen::MatrixXd> linear_;
};

inline Nonlinearity quadratic_nonlinearity(std::vector<Eigen::MatrixXd> forms) {
  return Nonlinearity::quadratic(std::move(forms));
}

struct ZeroModeSettings {
  ZeroModePolicy policy = ZeroModePolicy::project;
  double tolerance = kDefaultZeroModeTolerance;
};

/// A full instance. The diffusion coefficients are normalized to 1.
class Problem {
 public:
  Problem(Grid<double> grid, std::vector<double> eps, VectorField kernels, VectorField forcings, Nonlinearity g,
          double rho, double M, ZeroModeSettings zero_mode = {});

  const Grid<double>& grid() const { return grid_; }
  int components() const { return kernels_.size(); }
  const std::vector<double>& eps() const { return eps_; }
  /// eps = max_m eps_m.
  double epsilon() const;
  const VectorField& kernels() const { return kernels_; }
  const VectorField& forcings() const { return forcings_; }
  const Nonlinearity& nonlinearity() const { return g_; }
  double rho() const { return rho_; }
  double M() const { return M_; }
  const ZeroModeSettings& zero_mode() const { return zero_mode_; }

  Problem with_eps(std::vector<double> eps) const;
  Problem with_uniform_eps(double eps) const;
  Problem with_nonlinearity(Nonlinearity g) const;
  Problem with_forcings(VectorField forcings) const;
  Problem with_rho(double rho) const;

 private:
  void check() const;

  Grid<double> grid_;
  std::vector<double> eps_;
  VectorField kernels_;
  VectorField forcings_;
  Nonlinearity g_;
  double rho_;
  double M_;
  ZeroModeSettings zero_mode_;
};

struct IntegrabilityReport {
  std::vector<double> forcing_l1, forcing_l2;
  std::vector<double> kernel_l1, kernel_l2;
  bool all_finite = false;
  bool forcing_nontrivial = false;
  double H2 = 0;  ///< sum_m ||H_m||_{L1}^2
  double Q2 = 0;  ///< sum_m ||H_m||_{L2}^2
  bool pass = false;
  std::vector<std::string> failures;
};

/// Forcings and kernels integrable, some forcing nontrivial, H^2 > 0, Q^2 > 0.
IntegrabilityReport validate_data_assumptions(const Problem& p);

/// Radius c_e (||u0||_{H4} + 1) of the ball I in R^N.
double ball_radius_I(double u0_h4_norm, double c_e);

struct C2Norm {
  enum class Method { analytic, sampled };
  double value = 0;
  Method method = Method::analytic;
  std::int64_t sample_count = 0;
};

inline constexpr std::int64_t kDefaultC2SampleBudget = 100000;

/// ||g||_{C2(I)} = sum_m (sup|g_m| + sum_n sup|d_n g_m| + sum_{n,l} sup|d_n d_l g_m|).
/// Analytic when g supplies a ball norm, otherwise a sampled lower bound.
C2Norm c2_norm(const Nonlinearity& g, double radius, std::int64_t budget, std::mt19937_64& rng);
C2Norm c2_norm(const Nonlinearity& g, double radius, std::int64_t budget = kDefaultC2SampleBudget,
               std::uint64_t seed = 0);
/// Always samples, even when an analytic value exists.
C2Norm sampled_c2_norm(const Nonlinearity& g, double radius, std::int64_t budget, std::mt19937_64& rng);

struct NonlinearityReport {
  double value_at_zero = 0;     ///< max_m |g_m(0)|
  double gradient_at_zero = 0;  ///< max |dg_m/dz_n (0)|
  C2Norm c2;
  double M = 0;
  bool in_ball_DM = false;
  bool nontrivial = false;
  bool pass = false;
  std::vector<std::string> failures;
  std::vector<std::string> warnings;
};

inline constexpr double kOriginTolerance = 1e-12;
inline constexpr double kNontrivialThreshold = 1e-14;

NonlinearityReport validate_nonlinearity(const Nonlinearity& g, double radius, double M,
                                         std::int64_t budget = kDefaultC2SampleBudget, std::uint64_t seed = 0);

struct AnalyticField {
  RealField field;
  double l1;  ///< continuum L1 norm over R^d
  double l2;  ///< continuum L2 norm over R^d
};

/// amplitude * exp(-|x - center|^2 / (2 width^2)); empty center means the origin.
AnalyticField gaussian_field(const Grid<double>& grid, std::span<const double> center, double width,
                             double amplitude);

}  // namespace bilap
