#pragma once

// Periodic lattice discretization of R^d, the unitary Fourier transform on
// it, and the L1/L2/Linf/H4 norms used throughout the library.
//
// Physical nodes are x_j = -L + j*h with h = 2L/n. Spectral coefficients are
// stored in FFT order: storage index j maps to frequency index k = j for
// j < n/2 and k = j - n otherwise, so k ranges over {-n/2, ..., n/2-1} and
// p_k = (pi/L) * k.
//
//   forward:  F(p_k) = (2pi)^{-d/2} h^d  sum_x phi(x) e^{-i p_k x}
//   inverse:  phi(x) = (2pi)^{-d/2} dp^d sum_k F(p_k) e^{+i p_k x}

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bilap {

class LatticeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
class Grid {
 public:
  Grid(int dim, int points, Scalar half_side) : dim_(dim), points_(points), half_side_(half_side) {
    if (dim < 1) throw LatticeError("grid dimension must be >= 1");
    if (points < 4 || points % 2 != 0) throw LatticeError("points per axis must be even and >= 4");
    if (!(half_side > Scalar(0))) throw LatticeError("box half-side must be positive");
    size_ = 1;
    for (int a = 0; a < dim; ++a) {
      if (size_ > std::numeric_limits<Eigen::Index>::max() / points)
        throw LatticeError("grid too large");
      size_ *= points;
    }
  }

  int dim() const { return dim_; }
  int points() const { return points_; }
  Scalar half_side() const { return half_side_; }
  Eigen::Index size() const { return size_; }

  Scalar spacing() const { return Scalar(2) * half_side_ / Scalar(points_); }
  Scalar frequency_spacing() const { return Scalar(std::numbers::pi_v<double>) / half_side_; }
  Scalar cell_volume() const { return std::pow(spacing(), Scalar(dim_)); }
  Scalar frequency_cell_volume() const { return std::pow(frequency_spacing(), Scalar(dim_)); }

  Scalar coordinate(int j) const { return -half_side_ + Scalar(j) * spacing(); }
  int frequency_index(int j) const { return j < points_ / 2 ? j : j - points_; }

  // Base-n digits of a linear (row-major, last axis fastest) index.
  void digits(Eigen::Index linear, std::span<int> out) const {
    for (int a = dim_ - 1; a >= 0; --a) {
      out[a] = static_cast<int>(linear % points_);
      linear /= points_;
    }
  }

  Eigen::Index linear_index(std::span<const int> digits) const {
    Eigen::Index idx = 0;
    for (int a = 0; a < dim_; ++a) idx = idx * points_ + digits[a];
    return idx;
  }

  // Storage index of -k given the storage index of k.
  Eigen::Index negated(Eigen::Index linear) const {
    Eigen::Index out = 0, stride = 1;
    for (int a = 0; a < dim_; ++a) {
      const int j = static_cast<int>(linear % points_);
      linear /= points_;
      out += ((points_ - j) % points_) * stride;
      stride *= points_;
    }
    return out;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.dim_ == b.dim_ && a.points_ == b.points_ && a.half_side_ == b.half_side_;
  }

 private:
  int dim_;
  int points_;
  Scalar half_side_;
  Eigen::Index size_ = 0;
};

template <typename Scalar>
using RealArray = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using ComplexArray = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, 1>;

/// Real lattice function in physical representation.
template <typename Scalar>
struct BasicRealField {
  Grid<Scalar> grid;
  RealArray<Scalar> values;

  explicit BasicRealField(const Grid<Scalar>& g) : grid(g), values(RealArray<Scalar>::Zero(g.size())) {}
  BasicRealField(const Grid<Scalar>& g, RealArray<Scalar> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw LatticeError("field size does not match grid");
  }

  BasicRealField& operator+=(const BasicRealField& o) {
    if (!(o.grid == grid)) throw LatticeError("fields live on different grids");
    values += o.values;
    return *this;
  }
  BasicRealField& operator-=(const BasicRealField& o) {
    if (!(o.grid == grid)) throw LatticeError("fields live on different grids");
    values -= o.values;
    return *this;
  }
  BasicRealField& operator*=(Scalar s) { values *= s; return *this; }

  bool all_finite() const { return values.allFinite(); }
};

template <typename Scalar>
BasicRealField<Scalar> operator+(BasicRealField<Scalar> a, const BasicRealField<Scalar>& b) { return a += b; }
template <typename Scalar>
BasicRealField<Scalar> operator-(BasicRealField<Scalar> a, const BasicRealField<Scalar>& b) { return a -= b; }
template <typename Scalar>
BasicRealField<Scalar> operator*(Scalar s, BasicRealField<Scalar> a) { return a *= s; }

/// Lattice function in frequency representation (dense complex, FFT order).
template <typename Scalar>
struct BasicSpectralField {
  Grid<Scalar> grid;
  ComplexArray<Scalar> coeffs;

  explicit BasicSpectralField(const Grid<Scalar>& g) : grid(g), coeffs(ComplexArray<Scalar>::Zero(g.size())) {}
  BasicSpectralField(const Grid<Scalar>& g, ComplexArray<Scalar> c) : grid(g), coeffs(std::move(c)) {
    if (coeffs.size() != grid.size()) throw LatticeError("spectral field size does not match grid");
  }
};

/// N real components on one shared grid.
template <typename Scalar>
class BasicVectorField {
 public:
  BasicVectorField(const Grid<Scalar>& g, int components) : grid_(g) {
    if (components < 1) throw LatticeError("vector field needs at least one component");
    components_.assign(components, BasicRealField<Scalar>(g));
  }
  explicit BasicVectorField(std::vector<BasicRealField<Scalar>> components)
      : grid_(components.empty() ? throw LatticeError("vector field needs at least one component")
                                 : components.front().grid),
        components_(std::move(components)) {
    for (const auto& c : components_)
      if (!(c.grid == grid_)) throw LatticeError("vector field components must share one grid");
  }

  const Grid<Scalar>& grid() const { return grid_; }
  int size() const { return static_cast<int>(components_.size()); }
  const BasicRealField<Scalar>& operator[](int m) const { return components_[m]; }
  BasicRealField<Scalar>& operator[](int m) { return components_[m]; }
  auto begin() const { return components_.begin(); }
  auto end() const { return components_.end(); }

  BasicVectorField& operator+=(const BasicVectorField& o) {
    check_compatible(o);
    for (int m = 0; m < size(); ++m) components_[m] += o.components_[m];
    return *this;
  }
  BasicVectorField& operator-=(const BasicVectorField& o) {
    check_compatible(o);
    for (int m = 0; m < size(); ++m) components_[m] -= o.components_[m];
    return *this;
  }
  BasicVectorField& operator*=(Scalar s) {
    for (auto& c : components_) c *= s;
    return *this;
  }

 private:
  void check_compatible(const BasicVectorField& o) const {
    if (o.size() != size() || !(o.grid_ == grid_)) throw LatticeError("incompatible vector fields");
  }

  Grid<Scalar> grid_;
  std::vector<BasicRealField<Scalar>> components_;
};

template <typename Scalar>
BasicVectorField<Scalar> operator+(BasicVectorField<Scalar> a, const BasicVectorField<Scalar>& b) { return a += b; }
template <typename Scalar>
BasicVectorField<Scalar> operator-(BasicVectorField<Scalar> a, const BasicVectorField<Scalar>& b) { return a -= b; }
template <typename Scalar>
BasicVectorField<Scalar> operator*(Scalar s, BasicVectorField<Scalar> a) { return a *= s; }

using RealField = BasicRealField<double>;
using SpectralField = BasicSpectralField<double>;
using VectorField = BasicVectorField<double>;

namespace detail {

// Unscaled d-dimensional DFT applied axis by axis, in place.
template <typename Scalar>
void dft_axes(const Grid<Scalar>& grid, ComplexArray<Scalar>& data, bool inverse) {
  using Complex = std::complex<Scalar>;
  const Eigen::Index n = grid.points();
  Eigen::FFT<Scalar> fft;
  fft.SetFlag(Eigen::FFT<Scalar>::Unscaled);
  std::vector<Complex> line(n), out(n);

  Eigen::Index stride = 1;
  for (int axis = grid.dim() - 1; axis >= 0; --axis) {
    const Eigen::Index block = stride * n;
    for (Eigen::Index base = 0; base < data.size(); base += block) {
      for (Eigen::Index inner = 0; inner < stride; ++inner) {
        Complex* p = data.data() + base + inner;
        for (Eigen::Index j = 0; j < n; ++j) line[j] = p[j * stride];
        if (inverse)
          fft.inv(out.data(), line.data(), n);
        else
          fft.fwd(out.data(), line.data(), n);
        for (Eigen::Index j = 0; j < n; ++j) p[j * stride] = out[j];
      }
    }
    stride = block;
  }
}

// (-1)^{sum k_a}: phase from the box offset x_0 = -L.
template <typename Scalar>
RealArray<Scalar> offset_phase(const Grid<Scalar>& grid) {
  RealArray<Scalar> sign(grid.size());
  std::vector<int> dig(grid.dim());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    grid.digits(i, dig);
    int s = 0;
    for (int j : dig) s += j;
    sign[i] = (s % 2 == 0) ? Scalar(1) : Scalar(-1);
  }
  return sign;
}

template <typename Scalar>
Scalar unitary_factor(int dim) {
  return std::pow(Scalar(2) * Scalar(std::numbers::pi_v<double>), -Scalar(dim) / Scalar(2));
}

}  // namespace detail

/// |p_k|^2 for every storage index.
template <typename Scalar>
RealArray<Scalar> frequency_squared(const Grid<Scalar>& grid) {
  RealArray<Scalar> out(grid.size());
  std::vector<int> dig(grid.dim());
  const Scalar dp = grid.frequency_spacing();
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    grid.digits(i, dig);
    Scalar s(0);
    for (int j : dig) {
      const Scalar p = dp * Scalar(grid.frequency_index(j));
      s += p * p;
    }
    out[i] = s;
  }
  return out;
}

template <typename Scalar>
BasicSpectralField<Scalar> forward_transform(const BasicRealField<Scalar>& f) {
  const auto& grid = f.grid;
  ComplexArray<Scalar> data = f.values.template cast<std::complex<Scalar>>();
  detail::dft_axes(grid, data, false);
  const Scalar scale = detail::unitary_factor<Scalar>(grid.dim()) * grid.cell_volume();
  data *= (scale * detail::offset_phase(grid)).template cast<std::complex<Scalar>>();
  return {grid, std::move(data)};
}

/// Largest |F(-k) - conj F(k)| relative to max |F|.
template <typename Scalar>
Scalar conjugate_asymmetry(const BasicSpectralField<Scalar>& F) {
  const Scalar peak = F.coeffs.abs().maxCoeff();
  if (peak == Scalar(0)) return Scalar(0);
  Scalar worst(0);
  for (Eigen::Index i = 0; i < F.coeffs.size(); ++i) {
    const Eigen::Index j = F.grid.negated(i);
    worst = std::max(worst, std::abs(F.coeffs[j] - std::conj(F.coeffs[i])));
  }
  return worst / peak;
}

inline constexpr double kConjugateSymmetryTolerance = 1e-10;

template <typename Scalar>
BasicRealField<Scalar> inverse_transform(const BasicSpectralField<Scalar>& F) {
  const auto& grid = F.grid;
  const Scalar asym = conjugate_asymmetry(F);
  if (asym > Scalar(kConjugateSymmetryTolerance))
    throw LatticeError("inverse_transform: spectrum is not conjugate-symmetric (relative asymmetry " +
                       std::to_string(static_cast<double>(asym)) + ")");
  ComplexArray<Scalar> data = F.coeffs * detail::offset_phase(grid).template cast<std::complex<Scalar>>();
  detail::dft_axes(grid, data, true);
  const Scalar scale = detail::unitary_factor<Scalar>(grid.dim()) * grid.frequency_cell_volume();
  return {grid, (data.real() * scale).eval()};
}

template <typename Scalar>
Scalar norm_l1(const BasicRealField<Scalar>& f) {
  return f.grid.cell_volume() * f.values.abs().sum();
}

template <typename Scalar>
Scalar norm_l2(const BasicRealField<Scalar>& f) {
  return std::sqrt(f.grid.cell_volume() * f.values.square().sum());
}

template <typename Scalar>
Scalar norm_linf(const BasicRealField<Scalar>& f) {
  return f.values.size() == 0 ? Scalar(0) : f.values.abs().maxCoeff();
}

/// Spectral L2 norm: (dp^d sum |F|^2)^{1/2}. Equals norm_l2 by Parseval.
template <typename Scalar>
Scalar norm_l2(const BasicSpectralField<Scalar>& F) {
  return std::sqrt(F.grid.frequency_cell_volume() * F.coeffs.abs2().sum());
}

/// ||phi||_{H4}^2 = dp^d sum (1 + |p|^8) |F(p)|^2.
template <typename Scalar>
Scalar norm_h4(const BasicSpectralField<Scalar>& F) {
  const RealArray<Scalar> p2 = frequency_squared(F.grid);
  const RealArray<Scalar> weight = Scalar(1) + p2.square().square();
  return std::sqrt(F.grid.frequency_cell_volume() * (weight * F.coeffs.abs2()).sum());
}

template <typename Scalar>
Scalar norm_h4(const BasicRealField<Scalar>& f) {
  return norm_h4(forward_transform(f));
}

template <typename Scalar>
Scalar norm_h4_vector(const BasicVectorField<Scalar>& u) {
  Scalar s(0);
  for (const auto& c : u) {
    const Scalar n = norm_h4(c);
    s += n * n;
  }
  return std::sqrt(s);
}

template <typename Scalar>
Scalar norm_l2_vector(const BasicVectorField<Scalar>& u) {
  Scalar s(0);
  for (const auto& c : u) {
    const Scalar n = norm_l2(c);
    s += n * n;
  }
  return std::sqrt(s);
}

/// Samples fn(x) at every node; fn receives a span of d coordinates.
template <typename Scalar, typename Fn>
BasicRealField<Scalar> sample(const Grid<Scalar>& grid, Fn&& fn) {
  BasicRealField<Scalar> f(grid);
  std::vector<int> dig(grid.dim());
  std::vector<Scalar> x(grid.dim());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    grid.digits(i, dig);
    for (int a = 0; a < grid.dim(); ++a) x[a] = grid.coordinate(dig[a]);
    f.values[i] = fn(std::span<const Scalar>(x));
  }
  return f;
}

}  // namespace bilap
