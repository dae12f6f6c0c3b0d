#pragma once

// JSON experiment configuration: sections grid, problem, nonlinearity,
// solver and margins. Kernels and forcings are built from library
// constructors by name.
//
//   {"grid": {"d": 5, "n": 12, "L": 8},
//    "problem": {"N": 2, "rho": 1, "M": 1,
//                "eps": {"fraction": 0.5},
//                "zero_mode": {"policy": "project", "tolerance": 1e-8},
//                "kernels":  [{"type": "gaussian", "width": 1, "amplitude": 1}, ...],
//                "forcings": [...]},
//    "nonlinearity": {"type": "quadratic", "matrices": [[[1, 0.5], [0.5, 1]], ...],
//                     "normalize_to": 0.5},
//    "solver": {"tol": 1e-10, "max_iter": 200, "pairs": 50, "seed": 1, "delta": 0.01},
//    "margins": {"probe": 0.05, "ratio": 0.05, "ball": 0.01, "continuity": 0.05}}

#include "bilap/bounds.hpp"
#include "bilap/model.hpp"
#include "bilap/solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>

namespace bilap {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Margins {
  double probe = 0.05;       ///< max contraction ratio <= eps kappa (1 + probe)
  double ratio = 0.05;       ///< asymptotic step ratio <= eps kappa + ratio
  double ball = 0.01;        ///< iterates stay within rho (1 + ball)
  double continuity = 0.05;  ///< measured gap <= bound (1 + continuity)
  double apriori = 0.05;     ///< ||u_p|| <= apriori (1 + apriori)
};

struct ExperimentConfig {
  int d = 5;
  int n = 12;
  double L = 8;
  int N = 2;
  double rho = 1;
  double M = 1;
  ZeroModeSettings zero_mode;
  std::vector<nlohmann::json> kernels;
  std::vector<nlohmann::json> forcings;

  /// Explicit eps_m; otherwise eps_m = fraction * eps_max * weight_m.
  std::optional<std::vector<double>> eps_values;
  double eps_fraction = 0.5;
  std::vector<double> eps_weights;

  nlohmann::json nonlinearity;
  std::optional<double> normalize_to;  ///< scale g so ||g||_C2(I) = normalize_to * M

  SolverOptions solver;
  int pairs = 50;
  std::uint64_t seed = 1;
  double delta = 0.01;
  std::int64_t sample_budget = kDefaultC2SampleBudget;
  Margins margins;

  std::filesystem::path base_dir;  ///< resolves relative BFX1 paths
};

ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

RealField build_field(const Grid<double>& grid, const nlohmann::json& spec, const std::filesystem::path& base_dir);
Nonlinearity build_nonlinearity(const nlohmann::json& spec, int N);

/// A configured problem with u0 solved, g normalized and eps resolved.
struct Experiment {
  ExperimentConfig config;
  Problem problem;
  VectorField u0;
  double u0_h4 = 0;
  double u0_dropped_mass = 0;
  double c_e = 0;
  double radius_I = 0;
  double nonlinearity_scale = 1;
  IntegrabilityReport data_report;
  std::optional<BoundsReport> bounds;  ///< present iff the data assumptions pass
};

Experiment prepare(const ExperimentConfig& config);

/// Every resolved parameter (grid, eps, rho, M, scale, seeds, margins).
nlohmann::json resolved_config(const Experiment& e);

}  // namespace bilap
