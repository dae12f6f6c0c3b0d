#pragma once

// The operator l = -Laplace + Laplace^2 (symbol |p|^2 + |p|^4), its inverse
// on the periodic box, and convolution in the unitary convention
// (H * G)^ = (2pi)^{d/2} H^ G^.

#include "bilap/lattice.hpp"

#include <string>

namespace bilap {

class SpectralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The forcing carries a non-negligible zero-frequency component.
class ZeroModeRejected : public SpectralError {
 public:
  ZeroModeRejected(double mass, double threshold)
      : SpectralError("zero mode rejected: |f^(0)| = " + std::to_string(mass) + " exceeds " +
                      std::to_string(threshold)),
        mass_(mass) {}
  double mass() const { return mass_; }

 private:
  double mass_;
};

class GridTooLarge : public SpectralError {
 public:
  using SpectralError::SpectralError;
};

enum class ZeroModePolicy { project, reject };

inline constexpr double kDefaultZeroModeTolerance = 1e-8;

/// |p|^2 + |p|^4 on every storage index.
template <typename Scalar>
RealArray<Scalar> operator_symbol(const Grid<Scalar>& grid) {
  const RealArray<Scalar> p2 = frequency_squared(grid);
  return p2 + p2.square();
}

template <typename Scalar>
BasicSpectralField<Scalar> apply_operator(const BasicSpectralField<Scalar>& F) {
  return {F.grid, F.coeffs * operator_symbol(F.grid).template cast<std::complex<Scalar>>()};
}

template <typename Scalar>
BasicRealField<Scalar> apply_operator(const BasicRealField<Scalar>& u) {
  return inverse_transform(apply_operator(forward_transform(u)));
}

template <typename Scalar>
struct BasicLinearSolution {
  BasicSpectralField<Scalar> u_hat;
  Scalar dropped_mass;
};

template <typename Scalar>
struct BasicLinearSolve {
  BasicRealField<Scalar> u;
  Scalar dropped_mass;
};

using LinearSolve = BasicLinearSolve<double>;

/// u^ = f^ / (|p|^2 + |p|^4) off the zero mode; u^(0) = 0.
///
/// Under `reject`, throws ZeroModeRejected if
/// |f^(0)| > tol * ||f||_{L1} * (2pi)^{-d/2}; `f_l1` is that L1 norm.
template <typename Scalar>
BasicLinearSolution<Scalar> solve_linear(const BasicSpectralField<Scalar>& f_hat, ZeroModePolicy policy,
                                         Scalar f_l1, Scalar tol = Scalar(kDefaultZeroModeTolerance)) {
  const Scalar mass = std::abs(f_hat.coeffs[0]);
  if (policy == ZeroModePolicy::reject) {
    const Scalar threshold = tol * f_l1 * detail::unitary_factor<Scalar>(f_hat.grid.dim());
    if (mass > threshold) throw ZeroModeRejected(static_cast<double>(mass), static_cast<double>(threshold));
  }
  RealArray<Scalar> inv = operator_symbol(f_hat.grid);
  inv[0] = Scalar(1);
  inv = inv.inverse();
  inv[0] = Scalar(0);
  return {{f_hat.grid, f_hat.coeffs * inv.template cast<std::complex<Scalar>>()}, mass};
}

template <typename Scalar>
BasicLinearSolve<Scalar> solve_linear(const BasicRealField<Scalar>& f,
                                      ZeroModePolicy policy = ZeroModePolicy::project,
                                      Scalar tol = Scalar(kDefaultZeroModeTolerance)) {
  auto sol = solve_linear(forward_transform(f), policy, norm_l1(f), tol);
  return {inverse_transform(sol.u_hat), sol.dropped_mass};
}

/// (2pi)^{d/2} H^ G^, the spectrum of H * G.
template <typename Scalar>
BasicSpectralField<Scalar> convolve(const BasicSpectralField<Scalar>& H, const BasicSpectralField<Scalar>& G) {
  if (!(H.grid == G.grid)) throw SpectralError("convolve: fields live on different grids");
  const Scalar scale = Scalar(1) / detail::unitary_factor<Scalar>(H.grid.dim());
  return {H.grid, (H.coeffs * G.coeffs * scale).eval()};
}

/// Approximates the R^d convolution: h^d times the circular convolution of the samples.
template <typename Scalar>
BasicRealField<Scalar> convolve(const BasicRealField<Scalar>& H, const BasicRealField<Scalar>& G) {
  if (!(H.grid == G.grid)) throw SpectralError("convolve: fields live on different grids");
  return inverse_transform(convolve(forward_transform(H), forward_transform(G)));
}

inline constexpr Eigen::Index kDirectConvolutionLimit = 10000;

/// O(n^{2d}) quadrature h^d sum_y H((x - y) mod box) G(y). Test oracle only.
template <typename Scalar>
BasicRealField<Scalar> convolve_direct(const BasicRealField<Scalar>& H, const BasicRealField<Scalar>& G) {
  const auto& grid = H.grid;
  if (!(grid == G.grid)) throw SpectralError("convolve_direct: fields live on different grids");
  if (grid.size() > kDirectConvolutionLimit)
    throw GridTooLarge("convolve_direct: n^d = " + std::to_string(grid.size()) + " exceeds " +
                       std::to_string(kDirectConvolutionLimit));
  const int n = grid.points();
  const int d = grid.dim();
  BasicRealField<Scalar> out(grid);
  std::vector<int> xi(d), yi(d), diff(d);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    grid.digits(i, xi);
    Scalar acc(0);
    for (Eigen::Index j = 0; j < grid.size(); ++j) {
      grid.digits(j, yi);
      // x_i - y_j = (xi - yi) h lands on node (xi - yi + n/2) mod n.
      for (int a = 0; a < d; ++a) diff[a] = ((xi[a] - yi[a] + n / 2) % n + n) % n;
      acc += H.values[grid.linear_index(diff)] * G.values[j];
    }
    out.values[i] = grid.cell_volume() * acc;
  }
  return out;
}

}  // namespace bilap
