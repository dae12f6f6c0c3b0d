#include "bilap/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace bilap {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

RealArray<double> h4_weight(const Grid<double>& grid) {
  const RealArray<double> p2 = frequency_squared(grid);
  return 1.0 + p2.square().square();
}

double sum_weighted(const RealArray<double>& w, const ComplexArray<double>& c) { return (w * c.abs2()).sum(); }

SpectralVector zero_spectrum(const Grid<double>& grid, int N) { return SpectralVector(N, SpectralField(grid)); }

}  // namespace

SpectralVector forward_transform(const VectorField& u) {
  SpectralVector out;
  out.reserve(u.size());
  for (const auto& c : u) out.push_back(forward_transform(c));
  return out;
}

double norm_h4_vector(const SpectralVector& u) {
  if (u.empty()) return 0;
  const auto w = h4_weight(u.front().grid);
  double s = 0;
  for (const auto& c : u) s += sum_weighted(w, c.coeffs);
  return std::sqrt(u.front().grid.frequency_cell_volume() * s);
}

double h4_distance(const SpectralVector& a, const SpectralVector& b) {
  if (a.size() != b.size()) throw SolverError("h4_distance: component counts differ");
  if (a.empty()) return 0;
  const auto w = h4_weight(a.front().grid);
  double s = 0;
  for (std::size_t m = 0; m < a.size(); ++m) s += sum_weighted(w, a[m].coeffs - b[m].coeffs);
  return std::sqrt(a.front().grid.frequency_cell_volume() * s);
}

VectorField solve_u0(const Problem& p, double* dropped_mass) {
  VectorField u0(p.grid(), p.components());
  double dropped = 0;
  for (int m = 0; m < p.components(); ++m) {
    auto sol = solve_linear(p.forcings()[m], p.zero_mode().policy, p.zero_mode().tolerance);
    u0[m] = std::move(sol.u);
    dropped += sol.dropped_mass;
  }
  if (dropped_mass) *dropped_mass = dropped;
  return u0;
}

FixedPointMap::FixedPointMap(const Problem& p, VectorField u0)
    : problem_(p), u0_(std::move(u0)), kernel_hat_(forward_transform(p.kernels())) {
  if (u0_.size() != p.components() || !(u0_.grid() == p.grid()))
    throw SolverError("u0 does not match the problem");
  inverse_symbol_ = operator_symbol(p.grid());
  inverse_symbol_[0] = 1;
  inverse_symbol_ = inverse_symbol_.inverse();
  inverse_symbol_[0] = 0;
}

FixedPointMap::Image FixedPointMap::image(const VectorField& v) const {
  const auto& p = problem_;
  const auto& grid = p.grid();
  const int N = p.components();
  Image out{VectorField(grid, N), zero_spectrum(grid, N), 0.0};
  if (p.epsilon() == 0) return out;

  const VectorField G = p.nonlinearity().apply(u0_ + v);
  const double conv_scale = 1.0 / detail::unitary_factor<double>(grid.dim());
  for (int m = 0; m < N; ++m) {
    const double eps = p.eps()[m];
    if (eps == 0) continue;
    ComplexArray<double> rhs = (eps * conv_scale) * kernel_hat_[m].coeffs * forward_transform(G[m]).coeffs;
    const double mass = std::abs(rhs[0]);
    if (p.zero_mode().policy == ZeroModePolicy::reject) {
      const double l1 = norm_l1(inverse_transform(SpectralField(grid, rhs)));
      const double threshold = p.zero_mode().tolerance * l1 * detail::unitary_factor<double>(grid.dim());
      if (mass > threshold) throw ZeroModeRejected(mass, threshold);
    }
    out.dropped_mass += mass;
    out.spectrum[m].coeffs = rhs * inverse_symbol_.cast<std::complex<double>>();
    out.u[m] = inverse_transform(out.spectrum[m]);
  }
  return out;
}

VectorField apply_T(const Problem& p, const VectorField& u0, const VectorField& v) {
  return FixedPointMap(p, u0)(v);
}

double residual(const Problem& p, const VectorField& u) {
  const auto& grid = p.grid();
  const RealArray<double> symbol = operator_symbol(grid);
  const double conv_scale = 1.0 / detail::unitary_factor<double>(grid.dim());
  const VectorField G = p.nonlinearity().apply(u);
  double res2 = 0, f2 = 0;
  for (int m = 0; m < p.components(); ++m) {
    ComplexArray<double> f_hat = forward_transform(p.forcings()[m]).coeffs;
    ComplexArray<double> r = f_hat - symbol.cast<std::complex<double>>() * forward_transform(u[m]).coeffs;
    if (p.eps()[m] != 0)
      r += (p.eps()[m] * conv_scale) * forward_transform(p.kernels()[m]).coeffs * forward_transform(G[m]).coeffs;
    r[0] = 0;
    f_hat[0] = 0;
    res2 += r.abs2().sum();
    f2 += f_hat.abs2().sum();
  }
  return f2 > 0 ? std::sqrt(res2 / f2) : std::sqrt(grid.frequency_cell_volume() * res2);
}

double IterationTrace::asymptotic_ratio() const {
  std::vector<double> ratios;
  for (const auto& s : steps)
    if (std::isfinite(s.ratio)) ratios.push_back(s.ratio);
  if (ratios.empty()) return kNaN;
  return *std::max_element(ratios.begin() + ratios.size() / 2, ratios.end());
}

bool IterationTrace::all_in_ball() const {
  return std::all_of(steps.begin(), steps.end(), [](const IterationRecord& r) { return r.in_ball; });
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter_exceeded: return "MaxIterExceeded";
    case SolveStatus::diverged: return "DivergenceDetected";
  }
  return "unknown";
}

SolveReport picard(const Problem& p, const VectorField& u0, const std::optional<BoundsReport>& bounds,
                   const SolverOptions& options, const VectorField* start) {
  if (!(options.tol > 0)) throw SolverError("tolerance must be positive");
  if (options.max_iter < 1) throw SolverError("max_iter must be at least 1");
  const int N = p.components();
  const auto& grid = p.grid();
  const FixedPointMap map(p, u0);

  SolveReport report{u0, VectorField(grid, N), u0, 0, 0, 0, {}, bounds, SolveStatus::max_iter_exceeded, {}};
  report.u0_h4 = norm_h4_vector(u0);
  if (report.bounds) {
    auto& b = *report.bounds;
    b.eps = p.epsilon();
    b.contraction_constant = b.eps * b.kappa;
    b.apriori_up = b.contraction_constant * (b.u0_h4 + 1);
    if (b.eps > b.eps_max) report.warnings.push_back("eps exceeds eps_max: contraction is not guaranteed");
  } else {
    report.warnings.push_back("bounds unavailable: data assumptions fail");
  }

  VectorField current = start ? *start : VectorField(grid, N);
  SpectralVector current_hat = start ? forward_transform(*start) : zero_spectrum(grid, N);
  double first_step = kNaN, previous_step = kNaN;

  for (int k = 1; k <= options.max_iter; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    auto img = map.image(current);
    IterationRecord rec;
    rec.k = k;
    rec.step = h4_distance(img.spectrum, current_hat);
    rec.norm = norm_h4_vector(img.spectrum);
    rec.ratio = previous_step > 0 ? rec.step / previous_step : kNaN;
    rec.dropped_mass = img.dropped_mass;
    rec.in_ball = rec.norm <= p.rho() * (1 + options.ball_margin);
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.trace.steps.push_back(rec);

    current = std::move(img.u);
    current_hat = std::move(img.spectrum);
    if (k == 1) first_step = rec.step;
    previous_step = rec.step;

    if (!std::isfinite(rec.step) || !std::isfinite(rec.norm) ||
        (k > 1 && rec.step > options.divergence_factor * first_step)) {
      report.status = SolveStatus::diverged;
      break;
    }
    if (rec.step <= options.tol * std::max(1.0, rec.norm)) {
      report.status = SolveStatus::converged;
      break;
    }
  }

  report.u_p = std::move(current);
  report.u_p_h4 = norm_h4_vector(current_hat);
  report.u = u0 + report.u_p;
  report.residual = residual(p, report.u);
  return report;
}

SolveReport picard(const Problem& p, const SolverOptions& options) {
  const VectorField u0 = solve_u0(p);
  std::optional<BoundsReport> bounds;
  if (validate_data_assumptions(p).pass) bounds = compute_bounds(p, norm_h4_vector(forward_transform(u0)));
  return picard(p, u0, bounds, options);
}

VectorField random_h4_field(const Grid<double>& grid, int components, double h4_norm, std::mt19937_64& rng) {
  if (h4_norm < 0) throw SolverError("random_h4_field: norm must be nonnegative");
  std::normal_distribution<double> normal;
  const RealArray<double> envelope = h4_weight(grid).inverse();
  VectorField v(grid, components);
  SpectralVector spectra;
  for (int m = 0; m < components; ++m) {
    RealField noise(grid);
    for (Eigen::Index i = 0; i < grid.size(); ++i) noise.values[i] = normal(rng);
    SpectralField hat = forward_transform(noise);
    hat.coeffs *= envelope.cast<std::complex<double>>();
    v[m] = inverse_transform(hat);
    spectra.push_back(std::move(hat));
  }
  const double norm = norm_h4_vector(spectra);
  if (norm > 0) v *= h4_norm / norm;
  return v;
}

double contraction_ratio(const FixedPointMap& map, const VectorField& v1, const VectorField& v2) {
  const double denom = h4_distance(forward_transform(v1), forward_transform(v2));
  if (!(denom > 0)) throw SolverError("contraction_ratio: v1 and v2 coincide");
  return h4_distance(map.image(v1).spectrum, map.image(v2).spectrum) / denom;
}

ProbeResult contraction_probe(const Problem& p, const VectorField& u0, int pairs, std::uint64_t seed) {
  if (pairs < 1) throw SolverError("contraction_probe: pairs must be at least 1");
  const FixedPointMap map(p, u0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  ProbeResult out;
  for (int i = 0; i < pairs; ++i) {
    const double r1 = p.rho() * (1.0 - uniform(rng));
    const double r2 = p.rho() * (1.0 - uniform(rng));
    const VectorField v1 = random_h4_field(p.grid(), p.components(), r1, rng);
    const VectorField v2 = random_h4_field(p.grid(), p.components(), r2, rng);
    out.ratios.push_back(contraction_ratio(map, v1, v2));
    out.max_ratio = std::max(out.max_ratio, out.ratios.back());
  }
  return out;
}

ContinuityReport continuity_experiment(const Problem& p, const VectorField& u0, const BoundsReport& bounds,
                                       const Nonlinearity& g1, const Nonlinearity& g2,
                                       const SolverOptions& options, double margin, std::int64_t sample_budget,
                                       std::uint64_t seed) {
  ContinuityReport r;
  r.eps = p.epsilon();
  r.kappa = bounds.kappa;
  r.u0_h4 = bounds.u0_h4;

  const auto check1 = validate_nonlinearity(g1, bounds.ball_radius_I, p.M(), sample_budget, seed);
  const auto check2 = validate_nonlinearity(g2, bounds.ball_radius_I, p.M(), sample_budget, seed);
  r.assumptions_hold = check1.pass && check2.pass && r.eps <= bounds.eps_max;

  const auto s1 = picard(p.with_nonlinearity(g1), u0, bounds, options);
  const auto s2 = picard(p.with_nonlinearity(g2), u0, bounds, options);
  r.both_converged = s1.converged() && s2.converged();
  r.measured = h4_distance(forward_transform(s1.u), forward_transform(s2.u));

  const auto gap = c2_norm(g1 - g2, bounds.ball_radius_I, sample_budget, seed);
  r.g_gap = gap.value;
  r.gap_method = gap.method;
  r.bound = continuity_bound(r.eps, r.kappa, p.M(), r.u0_h4, r.g_gap);

  const double solver_floor = 2 * options.tol * std::max(1.0, std::max(s1.u_p_h4, s2.u_p_h4));
  const bool within = r.measured <= r.bound * (1 + margin) || (r.g_gap == 0 && r.measured <= solver_floor);
  r.pass = r.assumptions_hold && r.both_converged && within;
  return r;
}

}  // namespace bilap
