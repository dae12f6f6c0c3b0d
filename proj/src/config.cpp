#include "bilap/config.hpp"

#include "bilap/bfx1.hpp"

#include <fstream>

namespace bilap {
namespace {

using nlohmann::json;

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

Eigen::MatrixXd to_matrix(const json& rows, int N) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != N) throw ConfigError("matrix must have N rows");
  Eigen::MatrixXd A(N, N);
  for (int i = 0; i < N; ++i) {
    const auto& row = rows.at(i);
    if (!row.is_array() || static_cast<int>(row.size()) != N) throw ConfigError("matrix rows must have N entries");
    for (int j = 0; j < N; ++j) A(i, j) = row.at(j).get<double>();
  }
  return A;
}

json matrix_json(const Eigen::MatrixXd& A) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back(A(i, j));
    rows.push_back(row);
  }
  return rows;
}

std::vector<json> field_list(const json& problem, const char* key, int N) {
  if (!problem.contains(key)) throw ConfigError(std::string("problem.") + key + " is required");
  const auto& list = problem.at(key);
  if (!list.is_array() || static_cast<int>(list.size()) != N)
    throw ConfigError(std::string("problem.") + key + " must list N fields");
  return {list.begin(), list.end()};
}

}  // namespace

ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  c.base_dir = base_dir;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    const auto& grid = j.at("grid");
    c.d = grid.at("d").get<int>();
    c.n = grid.at("n").get<int>();
    c.L = grid.at("L").get<double>();

    const auto& problem = j.at("problem");
    c.N = problem.at("N").get<int>();
    if (c.N < 1) throw ConfigError("problem.N must be positive");
    c.rho = get_or(problem, "rho", 1.0);
    c.M = get_or(problem, "M", 1.0);
    if (problem.contains("zero_mode")) {
      const auto& zm = problem.at("zero_mode");
      const auto policy = get_or<std::string>(zm, "policy", "project");
      if (policy == "project")
        c.zero_mode.policy = ZeroModePolicy::project;
      else if (policy == "reject")
        c.zero_mode.policy = ZeroModePolicy::reject;
      else
        throw ConfigError("zero_mode.policy must be project or reject");
      c.zero_mode.tolerance = get_or(zm, "tolerance", kDefaultZeroModeTolerance);
    }
    if (problem.contains("eps")) {
      const auto& eps = problem.at("eps");
      if (eps.contains("values")) c.eps_values = eps.at("values").get<std::vector<double>>();
      c.eps_fraction = get_or(eps, "fraction", c.eps_fraction);
      c.eps_weights = get_or(eps, "weights", std::vector<double>{});
    }
    if (c.eps_weights.empty()) c.eps_weights.assign(c.N, 1.0);
    if (static_cast<int>(c.eps_weights.size()) != c.N) throw ConfigError("eps.weights must have N entries");
    if (c.eps_values && static_cast<int>(c.eps_values->size()) != c.N)
      throw ConfigError("eps.values must have N entries");
    c.kernels = field_list(problem, "kernels", c.N);
    c.forcings = field_list(problem, "forcings", c.N);

    c.nonlinearity = j.at("nonlinearity");
    if (c.nonlinearity.contains("normalize_to")) c.normalize_to = c.nonlinearity.at("normalize_to").get<double>();

    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      c.solver.tol = get_or(s, "tol", c.solver.tol);
      c.solver.max_iter = get_or(s, "max_iter", c.solver.max_iter);
      c.solver.divergence_factor = get_or(s, "divergence_factor", c.solver.divergence_factor);
      c.pairs = get_or(s, "pairs", c.pairs);
      c.seed = get_or(s, "seed", c.seed);
      c.delta = get_or(s, "delta", c.delta);
      c.sample_budget = get_or(s, "sample_budget", c.sample_budget);
    }
    if (j.contains("margins")) {
      const auto& m = j.at("margins");
      c.margins.probe = get_or(m, "probe", c.margins.probe);
      c.margins.ratio = get_or(m, "ratio", c.margins.ratio);
      c.margins.ball = get_or(m, "ball", c.margins.ball);
      c.margins.continuity = get_or(m, "continuity", c.margins.continuity);
      c.margins.apriori = get_or(m, "apriori", c.margins.apriori);
    }
    c.solver.ball_margin = c.margins.ball;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(j, path.parent_path());
}

RealField build_field(const Grid<double>& grid, const json& spec, const std::filesystem::path& base_dir) {
  try {
    const auto type = spec.at("type").get<std::string>();
    if (type == "gaussian") {
      const auto center = get_or(spec, "center", std::vector<double>{});
      return gaussian_field(grid, center, spec.at("width").get<double>(), get_or(spec, "amplitude", 1.0)).field;
    }
    if (type == "zero") return RealField(grid);
    if (type == "sum") {
      RealField out(grid);
      for (const auto& term : spec.at("terms")) out += build_field(grid, term, base_dir);
      return out;
    }
    if (type == "bfx1") {
      auto path = std::filesystem::path(spec.at("path").get<std::string>());
      if (path.is_relative()) path = base_dir / path;
      RealField f = bfx1::load(path);
      if (!(f.grid == grid)) throw ConfigError("bfx1 field " + path.string() + " does not match the configured grid");
      return f;
    }
    throw ConfigError("unknown field type '" + type + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed field spec: ") + e.what());
  } catch (const ModelError& e) {
    throw ConfigError(e.what());
  } catch (const bfx1::FormatError& e) {
    throw ConfigError(e.what());
  }
}

Nonlinearity build_nonlinearity(const json& spec, int N) {
  try {
    const auto type = spec.at("type").get<std::string>();
    if (type == "quadratic") {
      const auto& list = spec.at("matrices");
      if (!list.is_array() || static_cast<int>(list.size()) != N)
        throw ConfigError("nonlinearity.matrices must list N matrices");
      std::vector<Eigen::MatrixXd> forms;
      for (const auto& A : list) forms.push_back(to_matrix(A, N));
      return Nonlinearity::quadratic(std::move(forms));
    }
    if (type == "linear") return Nonlinearity::linear(to_matrix(spec.at("matrix"), N));
    if (type == "zero") return Nonlinearity::zero(N);
    throw ConfigError("unknown nonlinearity type '" + type + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed nonlinearity: ") + e.what());
  } catch (const ModelError& e) {
    throw ConfigError(e.what());
  }
}

Experiment prepare(const ExperimentConfig& config) {
  std::optional<Grid<double>> grid;
  try {
    grid.emplace(config.d, config.n, config.L);
  } catch (const LatticeError& e) {
    throw ConfigError(e.what());
  }
  std::vector<RealField> kernels, forcings;
  for (const auto& k : config.kernels) kernels.push_back(build_field(*grid, k, config.base_dir));
  for (const auto& f : config.forcings) forcings.push_back(build_field(*grid, f, config.base_dir));
  Nonlinearity g = build_nonlinearity(config.nonlinearity, config.N);

  std::optional<Problem> problem;
  try {
    problem.emplace(*grid, std::vector<double>(config.N, 0.0), VectorField(std::move(kernels)),
                    VectorField(std::move(forcings)), g, config.rho, config.M, config.zero_mode);
  } catch (const ModelError& e) {
    throw ConfigError(e.what());
  }

  double dropped = 0;
  VectorField u0 = solve_u0(*problem, &dropped);
  const double u0_h4 = norm_h4_vector(forward_transform(u0));
  const double c_e = sobolev_constant(config.d);
  const double radius = ball_radius_I(u0_h4, c_e);

  double scale = 1;
  if (config.normalize_to) {
    const auto c2 = c2_norm(g, radius, config.sample_budget, config.seed);
    if (c2.value > 0) scale = *config.normalize_to * config.M / c2.value;
    if (scale != 1) *problem = problem->with_nonlinearity(g.scaled(scale));
  }

  Experiment e{config, *problem, std::move(u0), u0_h4, dropped, c_e, radius, scale, {}, std::nullopt};
  e.data_report = validate_data_assumptions(e.problem);

  if (config.eps_values) e.problem = e.problem.with_eps(*config.eps_values);
  if (e.data_report.pass) {
    const double eps_max = epsilon_max(e.problem, u0_h4);
    if (!config.eps_values) {
      std::vector<double> eps;
      for (double w : config.eps_weights) eps.push_back(config.eps_fraction * eps_max * w);
      try {
        e.problem = e.problem.with_eps(std::move(eps));
      } catch (const ModelError& err) {
        throw ConfigError(err.what());
      }
    }
    e.bounds = compute_bounds(e.problem, u0_h4);
  }
  return e;
}

json resolved_config(const Experiment& e) {
  const auto& c = e.config;
  json j;
  j["grid"] = {{"d", c.d}, {"n", c.n}, {"L", c.L}};
  json problem = {{"N", c.N},
                  {"rho", c.rho},
                  {"M", c.M},
                  {"eps", e.problem.eps()},
                  {"eps_fraction", c.eps_values ? json(nullptr) : json(c.eps_fraction)},
                  {"eps_weights", c.eps_weights},
                  {"zero_mode",
                   {{"policy", c.zero_mode.policy == ZeroModePolicy::project ? "project" : "reject"},
                    {"tolerance", c.zero_mode.tolerance}}},
                  {"kernels", c.kernels},
                  {"forcings", c.forcings}};
  j["problem"] = problem;
  json nl = c.nonlinearity;
  nl["scale"] = e.nonlinearity_scale;
  if (const auto& forms = e.problem.nonlinearity().quadratic_forms()) {
    json mats = json::array();
    for (const auto& A : *forms) mats.push_back(matrix_json(A));
    nl["resolved_matrices"] = mats;
  }
  j["nonlinearity"] = nl;
  j["solver"] = {{"tol", c.solver.tol},
                 {"max_iter", c.solver.max_iter},
                 {"divergence_factor", c.solver.divergence_factor},
                 {"pairs", c.pairs},
                 {"seed", c.seed},
                 {"delta", c.delta},
                 {"sample_budget", c.sample_budget}};
  j["margins"] = {{"probe", c.margins.probe},
                  {"ratio", c.margins.ratio},
                  {"ball", c.margins.ball},
                  {"continuity", c.margins.continuity},
                  {"apriori", c.margins.apriori}};
  return j;
}

}  // namespace bilap
