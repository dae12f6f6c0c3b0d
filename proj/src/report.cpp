#include "bilap/report.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace bilap {

using nlohmann::json;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const BoundsReport& r) {
  return {{"d", r.d},
          {"c_e", r.c_e},
          {"sphere_measure", r.sphere_measure},
          {"H", r.H},
          {"Q", r.Q},
          {"u0_h4", r.u0_h4},
          {"rho", r.rho},
          {"M", r.M},
          {"eps", r.eps},
          {"eps_max", r.eps_max},
          {"kappa", r.kappa},
          {"contraction_constant", r.contraction_constant},
          {"apriori_up", r.apriori_up},
          {"ball_radius_I", r.ball_radius_I}};
}

json to_json(const IntegrabilityReport& r) {
  return {{"forcing_l1", r.forcing_l1}, {"forcing_l2", r.forcing_l2}, {"kernel_l1", r.kernel_l1},
          {"kernel_l2", r.kernel_l2},   {"all_finite", r.all_finite}, {"forcing_nontrivial", r.forcing_nontrivial},
          {"H2", r.H2},                 {"Q2", r.Q2},                 {"pass", r.pass},
          {"failures", r.failures}};
}

json to_json(const C2Norm& c) {
  return {{"value", c.value},
          {"method", c.method == C2Norm::Method::analytic ? "analytic" : "sampled"},
          {"sample_count", c.sample_count}};
}

json to_json(const NonlinearityReport& r) {
  return {{"value_at_zero", r.value_at_zero},
          {"gradient_at_zero", r.gradient_at_zero},
          {"c2_norm", to_json(r.c2)},
          {"M", r.M},
          {"in_ball_DM", r.in_ball_DM},
          {"nontrivial", r.nontrivial},
          {"pass", r.pass},
          {"failures", r.failures},
          {"warnings", r.warnings}};
}

json to_json(const IterationTrace& t) {
  json steps = json::array();
  for (const auto& s : t.steps)
    steps.push_back({{"k", s.k},
                     {"norm", s.norm},
                     {"step", s.step},
                     {"ratio", finite_or_null(s.ratio)},
                     {"dropped_mass", s.dropped_mass},
                     {"in_ball", s.in_ball},
                     {"wall_seconds", s.wall_seconds}});
  return {{"steps", steps},
          {"asymptotic_ratio", finite_or_null(t.asymptotic_ratio())},
          {"all_in_ball", t.all_in_ball()}};
}

json to_json(const SolveReport& r) {
  return {{"status", to_string(r.status)},
          {"converged", r.converged()},
          {"iterations", r.trace.steps.size()},
          {"u0_h4", r.u0_h4},
          {"u_p_h4", r.u_p_h4},
          {"u_h4", norm_h4_vector(r.u)},
          {"residual", r.residual},
          {"trace", to_json(r.trace)},
          {"bounds", r.bounds ? to_json(*r.bounds) : json(nullptr)},
          {"warnings", r.warnings}};
}

json to_json(const ProbeResult& r) { return {{"max_ratio", r.max_ratio}, {"ratios", r.ratios}}; }

json to_json(const ContinuityReport& r) {
  return {{"eps", r.eps},
          {"kappa", r.kappa},
          {"u0_h4", r.u0_h4},
          {"g_gap", r.g_gap},
          {"g_gap_method", r.gap_method == C2Norm::Method::analytic ? "analytic" : "sampled"},
          {"measured", r.measured},
          {"bound", r.bound},
          {"assumptions_hold", r.assumptions_hold},
          {"both_converged", r.both_converged},
          {"pass", r.pass}};
}

void write_trace_csv(std::ostream& os, const IterationTrace& t) {
  os << "k,norm,step,ratio\n" << std::setprecision(17);
  for (const auto& s : t.steps) {
    os << s.k << ',' << s.norm << ',' << s.step << ',';
    if (std::isfinite(s.ratio)) os << s.ratio;
    os << '\n';
  }
}

}  // namespace bilap
