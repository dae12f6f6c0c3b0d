#include "bilap/bounds.hpp"

namespace bilap {

formula::BoundInputs<double> bound_inputs(const Problem& p, double u0_h4) {
  formula::check_dimension(p.grid().dim());
  if (!(u0_h4 >= 0)) throw BoundsError("||u0||_H4 must be nonnegative");
  const auto report = validate_data_assumptions(p);
  if (!report.pass) {
    std::string why;
    for (const auto& f : report.failures) why += (why.empty() ? "" : "; ") + f;
    throw AssumptionsNotValidated("data assumptions fail: " + why);
  }
  return {p.grid().dim(), p.rho(), p.M(), std::sqrt(report.H2), std::sqrt(report.Q2), u0_h4};
}

double epsilon_max(const Problem& p, double u0_h4) { return formula::epsilon_max(bound_inputs(p, u0_h4)); }

double kappa(const Problem& p, double u0_h4) { return formula::kappa(bound_inputs(p, u0_h4)); }

double apriori_bound(const Problem& p, double u0_h4, double eps) {
  if (!(eps >= 0)) throw BoundsError("eps must be nonnegative");
  return formula::apriori_bound(bound_inputs(p, u0_h4), eps);
}

BoundsReport compute_bounds(const Problem& p, double u0_h4) {
  const auto in = bound_inputs(p, u0_h4);
  BoundsReport r;
  r.d = in.d;
  r.c_e = sobolev_constant(in.d);
  r.sphere_measure = sphere_measure(in.d);
  r.H = in.H;
  r.Q = in.Q;
  r.u0_h4 = u0_h4;
  r.rho = in.rho;
  r.M = in.M;
  r.eps = p.epsilon();
  r.eps_max = formula::epsilon_max(in);
  r.kappa = formula::kappa(in);
  r.contraction_constant = r.eps * r.kappa;
  r.apriori_up = formula::apriori_bound(in, r.eps);
  r.ball_radius_I = ball_radius_I(u0_h4, r.c_e);
  return r;
}

}  // namespace bilap
