#pragma once

// Analytic constants of the fixed-point argument. The formula layer is
// templated on the scalar type so it can be re-evaluated in extended
// precision; the Problem-level layer works in double.

#include "bilap/model.hpp"

#include <cmath>
#include <string>

namespace bilap {

class BoundsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class BadDimension : public BoundsError {
 public:
  explicit BadDimension(int d) : BoundsError("dimension " + std::to_string(d) + " outside 5..7") {}
};
class NonPositiveAlpha : public BoundsError {
 public:
  NonPositiveAlpha() : BoundsError("alpha must be positive") {}
};
class ContractionNotStrict : public BoundsError {
 public:
  ContractionNotStrict() : BoundsError("eps * kappa >= 1: the map is not a strict contraction") {}
};
class AssumptionsNotValidated : public BoundsError {
 public:
  using BoundsError::BoundsError;
};

namespace formula {

inline void check_dimension(int d) {
  if (d < 5 || d > 7) throw BadDimension(d);
}

template <typename S>
S pi() {
  using std::acos;
  return acos(S(-1));
}

template <typename S>
struct SplitMinimum {
  S r_star;
  S min_value;
};

/// Minimizer of alpha R^{d-4} + R^{-4} over R > 0 and the minimum value.
template <typename S>
SplitMinimum<S> minimize_split_bound(S alpha, int d) {
  using std::pow;
  check_dimension(d);
  if (!(alpha > S(0))) throw NonPositiveAlpha();
  const S dd(d);
  const S r_star = pow(S(4) / (alpha * (dd - S(4))), S(1) / dd);
  const S min_value = pow(alpha / S(4), S(4) / dd) * dd / pow(dd - S(4), (dd - S(4)) / dd);
  return {r_star, min_value};
}

/// Surface measure of the unit sphere in R^d, 2 pi^{d/2} / Gamma(d/2).
template <typename S>
S sphere_measure(int d) {
  using std::pow;
  using std::tgamma;
  check_dimension(d);
  const S half = S(d) / S(2);
  return S(2) * pow(pi<S>(), half) / tgamma(half);
}

/// int_0^inf r^{d-1} / (1 + r^8) dr = (pi/8) / sin(pi d / 8), finite for d <= 7.
template <typename S>
S radial_embedding_integral(int d) {
  using std::sin;
  check_dimension(d);
  return (pi<S>() / S(8)) / sin(pi<S>() * S(d) / S(8));
}

/// ||phi||_inf <= (2pi)^{-d/2} ||phi^||_L1 <= c_e ||phi||_H4 via Cauchy-Schwarz against 1 + |p|^8.
template <typename S>
S sobolev_constant(int d) {
  using std::pow;
  using std::sqrt;
  return pow(S(2) * pi<S>(), -S(d) / S(2)) * sqrt(sphere_measure<S>(d) * radial_embedding_integral<S>(d));
}

template <typename S>
struct BoundInputs {
  int d;
  S rho;
  S M;
  S H;  ///< sqrt(sum ||H_m||_L1^2)
  S Q;  ///< sqrt(sum ||H_m||_L2^2)
  S u0_h4;
};

/// H^2 (u+1)^{8/d-2} (|S^d|/4)^{4/d} d / ((d-4)(2pi)^4) + Q^2, with u = ||u0||_H4.
template <typename S>
S bracket(const BoundInputs<S>& in) {
  using std::pow;
  check_dimension(in.d);
  const S dd(in.d);
  const S u1 = in.u0_h4 + S(1);
  const S geometric = pow(sphere_measure<S>(in.d) / S(4), S(4) / dd) * dd / ((dd - S(4)) * pow(S(2) * pi<S>(), S(4)));
  return in.H * in.H * pow(u1, S(8) / dd - S(2)) * geometric + in.Q * in.Q;
}

/// Largest eps for which the map is a strict contraction of B_rho into itself.
template <typename S>
S epsilon_max(const BoundInputs<S>& in) {
  using std::sqrt;
  const S u1 = in.u0_h4 + S(1);
  return in.rho / (in.M * u1 * u1) / sqrt(bracket(in));
}

template <typename S>
S kappa(const BoundInputs<S>& in) {
  using std::sqrt;
  return in.M * (in.u0_h4 + S(1)) * sqrt(bracket(in));
}

/// A-priori H4 bound on the image of B_rho: eps M (u+1)^2 sqrt(bracket).
template <typename S>
S apriori_bound(const BoundInputs<S>& in, S eps) {
  using std::sqrt;
  const S u1 = in.u0_h4 + S(1);
  return eps * in.M * u1 * u1 * sqrt(bracket(in));
}

/// eps kappa / (M (1 - eps kappa)) (||u0||_H4 + 1) ||g1 - g2||_C2(I).
template <typename S>
S continuity_bound(S eps, S kappa_value, S M, S u0_h4, S g_gap) {
  const S q = eps * kappa_value;
  if (!(q < S(1))) throw ContractionNotStrict();
  return q / (M * (S(1) - q)) * (u0_h4 + S(1)) * g_gap;
}

}  // namespace formula

using formula::minimize_split_bound;
using SplitMinimum = formula::SplitMinimum<double>;

inline double sphere_measure(int d) { return formula::sphere_measure<double>(d); }
inline double sobolev_constant(int d) { return formula::sobolev_constant<double>(d); }
inline double continuity_bound(double eps, double kappa, double M, double u0_h4, double g_gap) {
  return formula::continuity_bound(eps, kappa, M, u0_h4, g_gap);
}

struct BoundsReport {
  int d = 0;
  double c_e = 0;
  double sphere_measure = 0;
  double H = 0;
  double Q = 0;
  double u0_h4 = 0;
  double rho = 0;
  double M = 0;
  double eps = 0;
  double eps_max = 0;
  double kappa = 0;
  double contraction_constant = 0;  ///< eps * kappa
  double apriori_up = 0;            ///< a-priori H4 bound on u_p at the current eps
  double ball_radius_I = 0;
};

/// H, Q and the dimension from a validated problem; throws AssumptionsNotValidated otherwise.
formula::BoundInputs<double> bound_inputs(const Problem& p, double u0_h4);

double epsilon_max(const Problem& p, double u0_h4);
double kappa(const Problem& p, double u0_h4);
double apriori_bound(const Problem& p, double u0_h4, double eps);

BoundsReport compute_bounds(const Problem& p, double u0_h4);

}  // namespace bilap
