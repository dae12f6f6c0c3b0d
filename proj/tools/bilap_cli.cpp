// Command-line front end. JSON reports go to stdout, diagnostics to stderr.
//
// Exit codes: 0 success, 1 assumption failure, 2 config error, 3 solver failure.

#include "bilap/bfx1.hpp"
#include "bilap/config.hpp"
#include "bilap/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using nlohmann::json;
using namespace bilap;

enum Exit { kOk = 0, kAssumptions = 1, kConfig = 2, kSolver = 3 };

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

json base_report(const Experiment& e, const char* command) {
  return {{"command", command},
          {"config", resolved_config(e)},
          {"u0_h4", e.u0_h4},
          {"u0_dropped_mass", e.u0_dropped_mass},
          {"c_e", e.c_e},
          {"ball_radius_I", e.radius_I}};
}

int require_bounds(const Experiment& e, json& out) {
  if (e.bounds) return kOk;
  out["data_assumptions"] = to_json(e.data_report);
  out["pass"] = false;
  emit(out);
  for (const auto& f : e.data_report.failures) std::cerr << "assumption failed: " << f << '\n';
  return kAssumptions;
}

int cmd_validate(const ExperimentConfig& cfg) {
  const Experiment e = prepare(cfg);
  json out = base_report(e, "validate");
  const auto nl = validate_nonlinearity(e.problem.nonlinearity(), e.radius_I, e.problem.M(), cfg.sample_budget,
                                        cfg.seed);
  out["data_assumptions"] = to_json(e.data_report);
  out["nonlinearity_assumptions"] = to_json(nl);
  const bool pass = e.data_report.pass && nl.pass;
  out["pass"] = pass;
  emit(out);
  for (const auto& f : e.data_report.failures) std::cerr << "assumption failed: " << f << '\n';
  for (const auto& f : nl.failures) std::cerr << "assumption failed: " << f << '\n';
  for (const auto& w : nl.warnings) std::cerr << "warning: " << w << '\n';
  return pass ? kOk : kAssumptions;
}

int cmd_bounds(const ExperimentConfig& cfg) {
  const Experiment e = prepare(cfg);
  json out = base_report(e, "bounds");
  if (int rc = require_bounds(e, out)) return rc;
  out["bounds"] = to_json(*e.bounds);
  emit(out);
  return kOk;
}

struct SolveArgs {
  std::optional<double> eps_fraction;
  std::optional<double> eps;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::string dump_dir;
  std::string trace_csv;
};

int cmd_solve(ExperimentConfig cfg, const SolveArgs& args) {
  if (args.eps_fraction) {
    if (!(*args.eps_fraction > 0)) throw ConfigError("--eps-fraction must be positive");
    cfg.eps_values.reset();
    cfg.eps_fraction = *args.eps_fraction;
  }
  if (args.eps) cfg.eps_values = std::vector<double>(cfg.N, *args.eps);
  if (args.tol) cfg.solver.tol = *args.tol;
  if (args.max_iter) cfg.solver.max_iter = *args.max_iter;

  const Experiment e = prepare(cfg);
  json out = base_report(e, "solve");
  if (int rc = require_bounds(e, out)) return rc;
  const SolveReport r = picard(e.problem, e.u0, e.bounds, cfg.solver);
  out["solve"] = to_json(r);
  emit(out);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';

  if (!args.trace_csv.empty()) {
    std::ofstream os(args.trace_csv);
    if (!os) throw ConfigError("cannot write " + args.trace_csv);
    write_trace_csv(os, r.trace);
  }
  if (!args.dump_dir.empty()) {
    const std::filesystem::path dir(args.dump_dir);
    std::filesystem::create_directories(dir);
    for (int m = 0; m < r.u.size(); ++m) {
      const auto idx = std::to_string(m);
      bfx1::save(dir / ("u0_" + idx + ".bfx1"), r.u0[m]);
      bfx1::save(dir / ("u_p_" + idx + ".bfx1"), r.u_p[m]);
      bfx1::save(dir / ("u_" + idx + ".bfx1"), r.u[m]);
    }
  }
  if (!r.converged()) {
    std::cerr << "solver failure: " << to_string(r.status) << '\n';
    return kSolver;
  }
  return kOk;
}

int cmd_probe(ExperimentConfig cfg, std::optional<int> pairs, std::optional<std::uint64_t> seed) {
  if (pairs) cfg.pairs = *pairs;
  if (seed) cfg.seed = *seed;
  const Experiment e = prepare(cfg);
  json out = base_report(e, "probe-contraction");
  if (int rc = require_bounds(e, out)) return rc;
  const auto probe = contraction_probe(e.problem, e.u0, cfg.pairs, cfg.seed);
  const double theory = e.bounds->contraction_constant;
  const bool pass = probe.max_ratio <= theory * (1 + cfg.margins.probe);
  out["max_ratio"] = probe.max_ratio;
  out["theoretical_eps_kappa"] = theory;
  out["ratios"] = probe.ratios;
  out["pass"] = pass;
  emit(out);
  return pass ? kOk : kSolver;
}

int cmd_continuity(ExperimentConfig cfg, std::optional<double> delta) {
  if (delta) cfg.delta = *delta;
  const Experiment e = prepare(cfg);
  json out = base_report(e, "continuity");
  if (int rc = require_bounds(e, out)) return rc;
  const Nonlinearity& g1 = e.problem.nonlinearity();
  const Nonlinearity g2 = g1.scaled(1 + cfg.delta);
  const auto r = continuity_experiment(e.problem, e.u0, *e.bounds, g1, g2, cfg.solver, cfg.margins.continuity,
                                       cfg.sample_budget, cfg.seed);
  out["delta"] = cfg.delta;
  out["continuity"] = to_json(r);
  out["pass"] = r.pass;
  emit(out);
  if (!r.assumptions_hold) {
    std::cerr << "assumption failed: both nonlinearities must lie in D_M with eps <= eps_max\n";
    return kAssumptions;
  }
  return r.pass ? kOk : kSolver;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-spectral solver and bound checks for the stationary nonlocal Laplace/bi-Laplace system"};
  app.require_subcommand(1);

  std::string config_path;
  auto add_config = [&](CLI::App* sub) { sub->add_option("config", config_path, "JSON config")->required(); };

  auto* validate = app.add_subcommand("validate", "check the data and nonlinearity assumptions");
  add_config(validate);
  auto* bounds = app.add_subcommand("bounds", "compute all analytic constants");
  add_config(bounds);

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Picard iteration to the fixed point");
  add_config(solve);
  solve->add_option("--eps-fraction", solve_args.eps_fraction, "eps as a fraction of eps_max");
  solve->add_option("--eps", solve_args.eps, "explicit eps for every component");
  solve->add_option("--tol", solve_args.tol, "relative H4 step tolerance");
  solve->add_option("--max-iter", solve_args.max_iter, "iteration cap");
  solve->add_option("--dump-fields", solve_args.dump_dir, "directory for BFX1 dumps of u0, u_p, u");
  solve->add_option("--trace-csv", solve_args.trace_csv, "write the iteration trace as CSV");

  std::optional<int> pairs;
  std::optional<std::uint64_t> seed;
  auto* probe = app.add_subcommand("probe-contraction", "sample Lipschitz ratios of the map on B_rho");
  add_config(probe);
  probe->add_option("--pairs", pairs, "number of random pairs");
  probe->add_option("--seed", seed, "sampling seed");

  std::optional<double> delta;
  auto* continuity = app.add_subcommand("continuity", "compare solutions for g and (1 + delta) g");
  add_config(continuity);
  continuity->add_option("--delta", delta, "relative perturbation of the nonlinearity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    const ExperimentConfig cfg = load_config(config_path);
    if (*validate) return cmd_validate(cfg);
    if (*bounds) return cmd_bounds(cfg);
    if (*solve) return cmd_solve(cfg, solve_args);
    if (*probe) return cmd_probe(cfg, pairs, seed);
    if (*continuity) return cmd_continuity(cfg, delta);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const AssumptionsNotValidated& e) {
    std::cerr << "assumption failed: " << e.what() << '\n';
    return kAssumptions;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  }
  return kConfig;
}
