#include "bilap/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bilap {
namespace {

double quadratic_ball_norm(const std::vector<Eigen::MatrixXd>& forms, double r) {
  double total = 0;
  for (const auto& A : forms) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A, Eigen::EigenvaluesOnly);
    const double spectral = eig.eigenvalues().cwiseAbs().maxCoeff();
    total += r * r * spectral + 2 * r * A.rowwise().norm().sum() + 2 * A.cwiseAbs().sum();
  }
  return total;
}

double linear_ball_norm(const Eigen::MatrixXd& B, double r) {
  return r * B.rowwise().norm().sum() + B.cwiseAbs().sum();
}

Eigen::VectorXd random_point_in_ball(int N, double radius, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  Eigen::VectorXd z(N);
  double len = 0;
  do {
    for (int i = 0; i < N; ++i) z[i] = normal(rng);
    len = z.norm();
  } while (len == 0);
  return z * (radius * std::pow(uniform(rng), 1.0 / N) / len);
}

}  // namespace

Nonlinearity::Nonlinearity(int components, ValueFn value, GradientFn gradient, HessianFn hessian,
                           BallNormFn ball_norm)
    : components_(components),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      hessian_(std::move(hessian)),
      ball_norm_(std::move(ball_norm)) {
  if (components < 1) throw ModelError("nonlinearity needs at least one component");
  if (!value_ || !gradient_ || !hessian_) throw ModelError("nonlinearity needs value, gradient and hessian");
}

Nonlinearity Nonlinearity::quadratic(std::vector<Eigen::MatrixXd> forms) {
  if (forms.empty()) throw ModelError("quadratic nonlinearity needs at least one form");
  const auto N = forms.size();
  for (auto& A : forms) {
    if (static_cast<std::size_t>(A.rows()) != N || static_cast<std::size_t>(A.cols()) != N)
      throw ModelError("quadratic forms must be N x N with N the number of forms");
    if (!A.allFinite()) throw ModelError("quadratic form has non-finite entries");
    A = (0.5 * (A + A.transpose())).eval();
  }
  auto value = [forms](const Point& z) {
    Eigen::VectorXd out(forms.size());
    for (std::size_t m = 0; m < forms.size(); ++m) out[m] = z.dot(forms[m] * z);
    return out;
  };
  auto gradient = [forms](const Point& z) {
    Eigen::MatrixXd out(forms.size(), z.size());
    for (std::size_t m = 0; m < forms.size(); ++m) out.row(m) = (2.0 * forms[m] * z).transpose();
    return out;
  };
  auto hessian = [forms](const Point&) {
    std::vector<Eigen::MatrixXd> out;
    for (const auto& A : forms) out.push_back(2.0 * A);
    return out;
  };
  auto norm = [forms](double r) { return quadratic_ball_norm(forms, r); };
  Nonlinearity g(static_cast<int>(N), value, gradient, hessian, norm);
  g.quadratic_ = std::move(forms);
  return g;
}

Nonlinearity Nonlinearity::linear(Eigen::MatrixXd B) {
  if (B.rows() != B.cols() || B.rows() < 1) throw ModelError("linear nonlinearity needs a square matrix");
  const int N = static_cast<int>(B.rows());
  auto value = [B](const Point& z) -> Eigen::VectorXd { return B * z; };
  auto gradient = [B](const Point&) -> Eigen::MatrixXd { return B; };
  auto hessian = [N](const Point&) { return std::vector<Eigen::MatrixXd>(N, Eigen::MatrixXd::Zero(N, N)); };
  auto norm = [B](double r) { return linear_ball_norm(B, r); };
  Nonlinearity g(N, value, gradient, hessian, norm);
  g.linear_ = std::move(B);
  return g;
}

Nonlinearity Nonlinearity::zero(int components) {
  return quadratic(std::vector<Eigen::MatrixXd>(components, Eigen::MatrixXd::Zero(components, components)));
}

std::optional<double> Nonlinearity::analytic_ball_norm(double radius) const {
  if (!ball_norm_) return std::nullopt;
  return ball_norm_(radius);
}

Nonlinearity Nonlinearity::scaled(double factor) const {
  if (quadratic_) {
    auto forms = *quadratic_;
    for (auto& A : forms) A *= factor;
    return quadratic(std::move(forms));
  }
  if (linear_) return linear(factor * *linear_);
  auto v = value_;
  auto gr = gradient_;
  auto h = hessian_;
  BallNormFn norm;
  if (ball_norm_) norm = [bn = ball_norm_, factor](double r) { return std::abs(factor) * bn(r); };
  return Nonlinearity(
      components_, [v, factor](const Point& z) -> Eigen::VectorXd { return factor * v(z); },
      [gr, factor](const Point& z) -> Eigen::MatrixXd { return factor * gr(z); },
      [h, factor](const Point& z) {
        auto out = h(z);
        for (auto& H : out) H *= factor;
        return out;
      },
      norm);
}

Nonlinearity operator-(const Nonlinearity& a, const Nonlinearity& b) {
  if (a.components_ != b.components_) throw ModelError("nonlinearities have different component counts");
  if (a.quadratic_ && b.quadratic_) {
    std::vector<Eigen::MatrixXd> forms;
    for (std::size_t m = 0; m < a.quadratic_->size(); ++m) forms.push_back((*a.quadratic_)[m] - (*b.quadratic_)[m]);
    return Nonlinearity::quadratic(std::move(forms));
  }
  if (a.linear_ && b.linear_) return Nonlinearity::linear(*a.linear_ - *b.linear_);
  return Nonlinearity(
      a.components_, [a, b](const Nonlinearity::Point& z) -> Eigen::VectorXd { return a.value(z) - b.value(z); },
      [a, b](const Nonlinearity::Point& z) -> Eigen::MatrixXd { return a.gradient(z) - b.gradient(z); },
      [a, b](const Nonlinearity::Point& z) {
        auto ha = a.hessian(z);
        const auto hb = b.hessian(z);
        for (std::size_t m = 0; m < ha.size(); ++m) ha[m] -= hb[m];
        return ha;
      });
}

VectorField Nonlinearity::apply(const VectorField& u) const {
  if (u.size() != components_) throw ModelError("nonlinearity applied to a field with the wrong component count");
  const int N = components_;
  VectorField out(u.grid(), N);
  if (quadratic_) {
    for (int m = 0; m < N; ++m) {
      const auto& A = (*quadratic_)[m];
      auto& G = out[m].values;
      for (int i = 0; i < N; ++i) {
        if (A(i, i) != 0) G += A(i, i) * u[i].values.square();
        for (int j = i + 1; j < N; ++j)
          if (A(i, j) != 0) G += (2 * A(i, j)) * u[i].values * u[j].values;
      }
    }
    return out;
  }
  if (linear_) {
    for (int m = 0; m < N; ++m)
      for (int n = 0; n < N; ++n)
        if ((*linear_)(m, n) != 0) out[m].values += (*linear_)(m, n) * u[n].values;
    return out;
  }
  Eigen::VectorXd z(N);
  for (Eigen::Index i = 0; i < u.grid().size(); ++i) {
    for (int n = 0; n < N; ++n) z[n] = u[n].values[i];
    const Eigen::VectorXd g = value_(z);
    for (int m = 0; m < N; ++m) out[m].values[i] = g[m];
  }
  return out;
}

Problem::Problem(Grid<double> grid, std::vector<double> eps, VectorField kernels, VectorField forcings,
                 Nonlinearity g, double rho, double M, ZeroModeSettings zero_mode)
    : grid_(std::move(grid)),
      eps_(std::move(eps)),
      kernels_(std::move(kernels)),
      forcings_(std::move(forcings)),
      g_(std::move(g)),
      rho_(rho),
      M_(M),
      zero_mode_(zero_mode) {
  check();
}

void Problem::check() const {
  if (grid_.dim() < 5 || grid_.dim() > 7) throw ModelError("problem dimension must be 5, 6 or 7");
  const int N = kernels_.size();
  if (forcings_.size() != N || g_.components() != N || static_cast<int>(eps_.size()) != N)
    throw ModelError("kernels, forcings, eps and nonlinearity must all have N components");
  if (!(kernels_.grid() == grid_) || !(forcings_.grid() == grid_))
    throw ModelError("kernels and forcings must live on the problem grid");
  for (double e : eps_)
    if (!(e >= 0) || !std::isfinite(e)) throw ModelError("eps_m must be finite and nonnegative");
  if (!(rho_ > 0 && rho_ <= 1)) throw ModelError("rho must lie in (0, 1]");
  if (!(M_ > 0) || !std::isfinite(M_)) throw ModelError("M must be positive");
  if (!(zero_mode_.tolerance >= 0)) throw ModelError("zero-mode tolerance must be nonnegative");
}

double Problem::epsilon() const { return *std::max_element(eps_.begin(), eps_.end()); }

Problem Problem::with_eps(std::vector<double> eps) const {
  Problem p = *this;
  p.eps_ = std::move(eps);
  p.check();
  return p;
}

Problem Problem::with_uniform_eps(double eps) const {
  return with_eps(std::vector<double>(components(), eps));
}

Problem Problem::with_nonlinearity(Nonlinearity g) const {
  Problem p = *this;
  p.g_ = std::move(g);
  p.check();
  return p;
}

Problem Problem::with_forcings(VectorField forcings) const {
  Problem p = *this;
  p.forcings_ = std::move(forcings);
  p.check();
  return p;
}

Problem Problem::with_rho(double rho) const {
  Problem p = *this;
  p.rho_ = rho;
  p.check();
  return p;
}

IntegrabilityReport validate_data_assumptions(const Problem& p) {
  IntegrabilityReport r;
  r.all_finite = true;
  double max_forcing_l2 = 0;
  for (int m = 0; m < p.components(); ++m) {
    const auto& f = p.forcings()[m];
    const auto& H = p.kernels()[m];
    r.forcing_l1.push_back(norm_l1(f));
    r.forcing_l2.push_back(norm_l2(f));
    r.kernel_l1.push_back(norm_l1(H));
    r.kernel_l2.push_back(norm_l2(H));
    r.all_finite = r.all_finite && f.all_finite() && H.all_finite();
    max_forcing_l2 = std::max(max_forcing_l2, r.forcing_l2.back());
    r.H2 += r.kernel_l1.back() * r.kernel_l1.back();
    r.Q2 += r.kernel_l2.back() * r.kernel_l2.back();
  }
  r.forcing_nontrivial = max_forcing_l2 > kNontrivialThreshold;
  if (!r.all_finite) r.failures.push_back("forcings and kernels must be finite (L1 and L2 integrable)");
  if (!r.forcing_nontrivial) r.failures.push_back("forcing: no f_m is nontrivial");
  if (!(r.H2 > 0)) r.failures.push_back("kernel: H^2 = sum ||H_m||_L1^2 must be positive");
  if (!(r.Q2 > 0)) r.failures.push_back("kernel: Q^2 = sum ||H_m||_L2^2 must be positive");
  r.pass = r.failures.empty();
  return r;
}

double ball_radius_I(double u0_h4_norm, double c_e) {
  if (u0_h4_norm < 0 || c_e < 0) throw ModelError("ball_radius_I: inputs must be nonnegative");
  return c_e * (u0_h4_norm + 1);
}

C2Norm sampled_c2_norm(const Nonlinearity& g, double radius, std::int64_t budget, std::mt19937_64& rng) {
  if (radius < 0) throw ModelError("c2_norm: radius must be nonnegative");
  if (budget < 1) throw ModelError("c2_norm: sample budget must be positive");
  const int N = g.components();
  Eigen::VectorXd sup_value = Eigen::VectorXd::Zero(N);
  Eigen::MatrixXd sup_grad = Eigen::MatrixXd::Zero(N, N);
  std::vector<Eigen::MatrixXd> sup_hess(N, Eigen::MatrixXd::Zero(N, N));
  for (std::int64_t s = 0; s < budget; ++s) {
    const Eigen::VectorXd z = random_point_in_ball(N, radius, rng);
    sup_value = sup_value.cwiseMax(g.value(z).cwiseAbs());
    sup_grad = sup_grad.cwiseMax(g.gradient(z).cwiseAbs());
    const auto h = g.hessian(z);
    for (int m = 0; m < N; ++m) sup_hess[m] = sup_hess[m].cwiseMax(h[m].cwiseAbs());
  }
  double total = sup_value.sum() + sup_grad.sum();
  for (const auto& H : sup_hess) total += H.sum();
  return {total, C2Norm::Method::sampled, budget};
}

C2Norm c2_norm(const Nonlinearity& g, double radius, std::int64_t budget, std::mt19937_64& rng) {
  if (radius < 0) throw ModelError("c2_norm: radius must be nonnegative");
  if (auto exact = g.analytic_ball_norm(radius)) return {*exact, C2Norm::Method::analytic, 0};
  return sampled_c2_norm(g, radius, budget, rng);
}

C2Norm c2_norm(const Nonlinearity& g, double radius, std::int64_t budget, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return c2_norm(g, radius, budget, rng);
}

NonlinearityReport validate_nonlinearity(const Nonlinearity& g, double radius, double M, std::int64_t budget,
                                         std::uint64_t seed) {
  NonlinearityReport r;
  r.M = M;
  const int N = g.components();
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(N);
  r.value_at_zero = g.value(origin).cwiseAbs().maxCoeff();
  r.gradient_at_zero = g.gradient(origin).cwiseAbs().maxCoeff();

  std::mt19937_64 rng(seed);
  r.c2 = c2_norm(g, radius, budget, rng);
  r.in_ball_DM = r.c2.value <= M;

  const std::int64_t probes = std::min<std::int64_t>(budget, 10000);
  for (std::int64_t s = 0; s < probes && !r.nontrivial; ++s) {
    const Eigen::VectorXd z = random_point_in_ball(N, radius, rng);
    r.nontrivial = g.value(z).cwiseAbs().maxCoeff() > kNontrivialThreshold;
  }

  if (r.value_at_zero > kOriginTolerance) r.failures.push_back("g(0) != 0");
  if (r.gradient_at_zero > kOriginTolerance) r.failures.push_back("grad g(0) != 0");
  if (!r.in_ball_DM) r.failures.push_back("||g||_C2(I) exceeds M: g is outside D_M");
  if (!r.nontrivial) r.failures.push_back("g vanishes identically on the ball I");
  if (N < 2) r.warnings.push_back("N = 1: the model is stated for systems with N >= 2");
  r.pass = r.failures.empty();
  return r;
}

AnalyticField gaussian_field(const Grid<double>& grid, std::span<const double> center, double width,
                             double amplitude) {
  if (!(width > 0)) throw ModelError("gaussian_field: width must be positive");
  const int d = grid.dim();
  if (!center.empty() && static_cast<int>(center.size()) != d)
    throw ModelError("gaussian_field: center must have d coordinates");
  std::vector<double> c(center.begin(), center.end());
  if (c.empty()) c.assign(d, 0.0);
  const double inv = 1.0 / (2 * width * width);
  RealField f = sample(grid, [&](std::span<const double> x) {
    double r2 = 0;
    for (int a = 0; a < d; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
    return amplitude * std::exp(-r2 * inv);
  });
  const double pi = std::numbers::pi;
  const double l1 = std::abs(amplitude) * std::pow(2 * pi * width * width, d / 2.0);
  const double l2 = std::abs(amplitude) * std::pow(pi * width * width, d / 4.0);
  return {std::move(f), l1, l2};
}

}  // namespace bilap
