#pragma once

// The map v -> T_g(v) solving
//   (-Laplace + Laplace^2) u_m = eps_m * (H_m * g_m(u0 + v)),
// the background solve for u0, Picard iteration to the fixed point u_p, the
// residual of the full stationary system, and empirical probes of the
// contraction and continuity estimates.

#include "bilap/bounds.hpp"
#include "bilap/model.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace bilap {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using SpectralVector = std::vector<SpectralField>;

SpectralVector forward_transform(const VectorField& u);
double norm_h4_vector(const SpectralVector& u);
/// H4 norm of a - b computed on spectra.
double h4_distance(const SpectralVector& a, const SpectralVector& b);

/// Background solution: (-Laplace + Laplace^2) u0_m = f_m for every m.
VectorField solve_u0(const Problem& p, double* dropped_mass = nullptr);

/// T_g with the kernel spectra and the inverse symbol cached.
class FixedPointMap {
 public:
  FixedPointMap(const Problem& p, VectorField u0);

  struct Image {
    VectorField u;
    SpectralVector spectrum;
    double dropped_mass = 0;  ///< sum over components of |rhs^(0)|
  };

  Image image(const VectorField& v) const;
  VectorField operator()(const VectorField& v) const { return image(v).u; }

  const Problem& problem() const { return problem_; }
  const VectorField& u0() const { return u0_; }

 private:
  Problem problem_;
  VectorField u0_;
  SpectralVector kernel_hat_;
  RealArray<double> inverse_symbol_;
};

VectorField apply_T(const Problem& p, const VectorField& u0, const VectorField& v);

/// ||[Laplace - Laplace^2] u_m + eps_m H_m * g_m(u) + f_m||_{L2,R^N} / ||f||_{L2,R^N},
/// both without the zero mode. Falls back to the absolute norm when f vanishes.
double residual(const Problem& p, const VectorField& u);

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 200;
  double divergence_factor = 10;
  double ball_margin = 0.01;
};

struct IterationRecord {
  int k = 0;
  double norm = 0;   ///< ||u^(k)||_{H4,R^N}
  double step = 0;   ///< ||u^(k) - u^(k-1)||_{H4,R^N}
  double ratio = 0;  ///< step_k / step_{k-1}; NaN when undefined
  double dropped_mass = 0;
  double wall_seconds = 0;
  bool in_ball = true;
};

struct IterationTrace {
  std::vector<IterationRecord> steps;

  /// Largest step ratio over the second half of the recorded ratios; NaN if none.
  double asymptotic_ratio() const;
  bool all_in_ball() const;
};

enum class SolveStatus { converged, max_iter_exceeded, diverged };

const char* to_string(SolveStatus s);

struct SolveReport {
  VectorField u0;
  VectorField u_p;
  VectorField u;  ///< u0 + u_p
  double u0_h4 = 0;
  double u_p_h4 = 0;
  double residual = 0;
  IterationTrace trace;
  std::optional<BoundsReport> bounds;
  SolveStatus status = SolveStatus::max_iter_exceeded;
  std::vector<std::string> warnings;

  bool converged() const { return status == SolveStatus::converged; }
};

/// Picard iteration u^(k+1) = T_g(u^(k)) from u^(0) = `start` (zero by default).
///
/// Stops when step_k <= tol * max(1, ||u^(k)||); reports `diverged` when a step
/// exceeds divergence_factor times the first step or turns non-finite.
SolveReport picard(const Problem& p, const VectorField& u0, const std::optional<BoundsReport>& bounds,
                   const SolverOptions& options = {}, const VectorField* start = nullptr);
SolveReport picard(const Problem& p, const SolverOptions& options = {});

/// Gaussian spectral coefficients with a (1 + |p|^8)^{-1} envelope, scaled to the given H4 norm.
VectorField random_h4_field(const Grid<double>& grid, int components, double h4_norm, std::mt19937_64& rng);

/// ||T v1 - T v2||_H4 / ||v1 - v2||_H4.
double contraction_ratio(const FixedPointMap& map, const VectorField& v1, const VectorField& v2);

struct ProbeResult {
  double max_ratio = 0;
  std::vector<double> ratios;
};

/// Random pairs in B_rho (norms rho * U(0,1]); deterministic given the seed.
ProbeResult contraction_probe(const Problem& p, const VectorField& u0, int pairs, std::uint64_t seed);

struct ContinuityReport {
  double eps = 0;
  double kappa = 0;
  double u0_h4 = 0;
  double g_gap = 0;  ///< ||g1 - g2||_C2(I)
  C2Norm::Method gap_method = C2Norm::Method::analytic;
  double measured = 0;  ///< ||u1 - u2||_{H4,R^N}
  double bound = 0;
  bool assumptions_hold = false;
  bool both_converged = false;
  bool pass = false;
};

ContinuityReport continuity_experiment(const Problem& p, const VectorField& u0, const BoundsReport& bounds,
                                       const Nonlinearity& g1, const Nonlinearity& g2,
                                       const SolverOptions& options = {}, double margin = 0.05,
                                       std::int64_t sample_budget = kDefaultC2SampleBudget,
                                       std::uint64_t seed = 0);

}  // namespace bilap
