//==============================================================================
// grid.hpp
// Spectral discretization of the strip T x [-Ly, Ly) (periodic in both
// directions), Fourier transforms, spectral differentiation, 2/3-rule
// dealiasing, x-mode projections and Lp norms.
//
// Conventions (single source of truth for the whole project):
//   * x_i = i * 2pi/Nx,  y_j = -Ly + j * 2Ly/Ny.
//   * f(x, y) = sum_{kx, ky} coef(kx, ky) exp(i kx x + i ky y), so coef(0, 0)
//     is the domain mean and ||f||_L2^2 = area * sum |coef|^2.
//   * Coefficients are stored row-major over (kx, ky) in FFT index order:
//     index i <-> kx = i for i <= Nx/2, i - Nx otherwise (same for ky in
//     units of pi/Ly).
//   * Fields may live in a sheared frame with shear phase s: the lab-frame
//     y-wavenumber of coefficient (kx, ky) is ky - s*kx. Every operator that
//     touches y-derivatives takes the phase; s = 0 is the lab frame.
//==============================================================================
#pragma once

#include <complex>
#include <cstddef>
#include <cstdlib>
#include <memory>
#include <span>
#include <vector>

namespace couette {

using Complex = std::complex<double>;

namespace detail {
struct FftPlans;
}

class Grid {
 public:
  /// Throws std::invalid_argument for odd or tiny resolutions and Ly <= 0.
  static Grid make(int nx, int ny, double ly);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }
  double lx() const;
  double ly() const { return ly_; }
  double dx() const;
  double dy() const { return 2.0 * ly_ / ny_; }
  double area() const { return lx() * 2.0 * ly_; }
  /// Spacing of the y-wavenumber lattice, pi / Ly.
  double ky_unit() const;

  double x(int i) const { return i * dx(); }
  double y(int j) const { return -ly_ + j * dy(); }

  /// Integer x-wavenumber / integer y-lattice index of storage slot.
  int kx_index(int i) const { return i <= nx_ / 2 ? i : i - nx_; }
  int ky_index(int j) const { return j <= ny_ / 2 ? j : j - ny_; }
  double kx(int i) const { return kx_index(i); }
  double ky(int j) const { return ky_index(j) * ky_unit(); }
  /// Lab-frame y-wavenumber of slot (i, j) at shear phase s.
  double ky_eff(int i, int j, double shear) const { return ky(j) - shear * kx(i); }

  std::span<const double> kx_values() const { return kx_; }
  std::span<const double> ky_values() const { return ky_; }

  /// 2/3 rule: 3|kx| <= Nx and 3|ky/unit| <= Ny.
  bool retained(int i, int j) const {
    return 3 * std::abs(kx_index(i)) <= nx_ && 3 * std::abs(ky_index(j)) <= ny_;
  }

  std::size_t at(int i, int j) const { return static_cast<std::size_t>(i) * ny_ + j; }

  // Raw transforms on row-major (ix, jy) samples / coefficients.
  void forward(std::span<const double> samples, std::span<Complex> coef) const;
  void inverse(std::span<const Complex> coef, std::span<double> samples) const;

  /// Test hook: scales the forward transform by `factor`. Used by the
  /// oracle suite to confirm that the Parseval check catches normalization
  /// faults.
  Grid with_normalization_fault(double factor) const;

  /// Empty placeholder; only make() produces a usable grid.
  Grid() = default;

  bool same_shape(const Grid& other) const {
    return nx_ == other.nx_ && ny_ == other.ny_ && ly_ == other.ly_;
  }

 private:
  int nx_ = 0;
  int ny_ = 0;
  double ly_ = 0.0;
  double norm_fault_ = 1.0;
  std::vector<double> kx_;
  std::vector<double> ky_;
  std::shared_ptr<const detail::FftPlans> plans_;
};

/// Real samples on the collocation grid, row-major (ix, jy).
struct RealField {
  Grid grid;
  std::vector<double> values;

  explicit RealField(const Grid& g) : grid(g), values(g.size(), 0.0) {}
  double& operator()(int i, int j) { return values[grid.at(i, j)]; }
  double operator()(int i, int j) const { return values[grid.at(i, j)]; }
};

/// Complex Fourier coefficients of a real 2D field.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(const Grid& g) : grid_(g), coef_(g.size()) {}

  const Grid& grid() const { return grid_; }
  std::span<Complex> coef() { return coef_; }
  std::span<const Complex> coef() const { return coef_; }
  Complex& operator()(int i, int j) { return coef_[grid_.at(i, j)]; }
  const Complex& operator()(int i, int j) const { return coef_[grid_.at(i, j)]; }

  SpectralField& operator+=(const SpectralField& rhs);
  SpectralField& operator-=(const SpectralField& rhs);
  SpectralField& operator*=(double factor);

  /// Largest |coef(-k) - conj(coef(k))| over the non-Nyquist modes.
  double hermitian_defect() const;

 private:
  Grid grid_;
  std::vector<Complex> coef_;
};

SpectralField operator+(SpectralField lhs, const SpectralField& rhs);
SpectralField operator-(SpectralField lhs, const SpectralField& rhs);
SpectralField operator*(double factor, SpectralField rhs);

/// x-independent part P0 f, kept as its kx = 0 coefficients over ky.
struct ZeroModeField {
  Grid grid;
  std::vector<Complex> coef;

  /// Embeds back into a full SpectralField (all kx != 0 slots zero).
  SpectralField to_field() const;
};

// Transforms. Throws std::invalid_argument on shape mismatch.
SpectralField to_spectral(const RealField& samples);
SpectralField to_spectral(const Grid& grid, std::span<const double> samples);
RealField from_spectral(const SpectralField& field);

/// Samples a callable f(x, y) on the collocation grid.
template <typename F>
RealField sample(const Grid& grid, F&& f) {
  RealField out(grid);
  for (int i = 0; i < grid.nx(); ++i) {
    for (int j = 0; j < grid.ny(); ++j) {
      out(i, j) = f(grid.x(i), grid.y(j));
    }
  }
  return out;
}

// Spectral derivatives; `shear` is the frame phase s (0 = lab frame).
SpectralField ddx(const SpectralField& f);
SpectralField ddy(const SpectralField& f, double shear = 0.0);
SpectralField laplacian(const SpectralField& f, double shear = 0.0);

/// 2/3-rule truncation; idempotent.
SpectralField dealias(const SpectralField& f);
void dealias_in_place(SpectralField& f);

ZeroModeField project_zero(const SpectralField& f);
SpectralField project_nonzero(const SpectralField& f);

/// L2 norm computed from coefficients (Parseval).
double l2_norm_spectral(const SpectralField& f);

/// Lp norm by collocation quadrature; p in {1, 2, 4, inf}.
/// Throws std::invalid_argument for any other p.
double lp_norm(const RealField& f, double p);
double lp_norm(const SpectralField& f, double p);

}  // namespace couette
