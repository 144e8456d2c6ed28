#include "couette_ks/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace couette {

namespace detail {

// FFTW's planner is not thread-safe; execution with the new-array interface is.
// Plans use FFTW_ESTIMATE so the chosen algorithm (and hence every bit of the
// output) does not depend on timing.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftPlans {
  int nx;
  int ny;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  FftPlans(int nx_, int ny_) : nx(nx_), ny(ny_) {
    const std::size_t nreal = static_cast<std::size_t>(nx) * ny;
    const std::size_t nhalf = static_cast<std::size_t>(nx) * (ny / 2 + 1);
    double* r = fftw_alloc_real(nreal);
    fftw_complex* c = fftw_alloc_complex(nhalf);
    {
      std::lock_guard lock(planner_mutex());
      const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
      r2c = fftw_plan_dft_r2c_2d(nx, ny, r, c, flags);
      c2r = fftw_plan_dft_c2r_2d(nx, ny, c, r, flags);
    }
    fftw_free(r);
    fftw_free(c);
    if (r2c == nullptr || c2r == nullptr) {
      throw std::runtime_error("FFTW planning failed");
    }
  }

  ~FftPlans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(r2c);
    fftw_destroy_plan(c2r);
  }

  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
};

namespace {

// (-1)^m accounts for the y-origin at -Ly: exp(i ky y_j) = (-1)^m exp(2 pi i m j / Ny).
inline double origin_sign(int j) { return (j % 2 == 0) ? 1.0 : -1.0; }

}  // namespace

}  // namespace detail

Grid Grid::make(int nx, int ny, double ly) {
  if (nx < 8 || ny < 8 || nx % 2 != 0 || ny % 2 != 0) {
    throw std::invalid_argument("grid resolution must be even and >= 8 (got Nx=" +
                                std::to_string(nx) + ", Ny=" + std::to_string(ny) + ")");
  }
  if (!(ly > 0.0) || !std::isfinite(ly)) {
    throw std::invalid_argument("grid half-width Ly must be positive");
  }
  Grid g;
  g.nx_ = nx;
  g.ny_ = ny;
  g.ly_ = ly;
  g.kx_.resize(nx);
  g.ky_.resize(ny);
  for (int i = 0; i < nx; ++i) g.kx_[i] = g.kx(i);
  for (int j = 0; j < ny; ++j) g.ky_[j] = g.ky(j);
  g.plans_ = std::make_shared<const detail::FftPlans>(nx, ny);
  return g;
}

double Grid::lx() const { return 2.0 * std::numbers::pi; }
double Grid::dx() const { return lx() / nx_; }
double Grid::ky_unit() const { return std::numbers::pi / ly_; }

Grid Grid::with_normalization_fault(double factor) const {
  Grid g = *this;
  g.norm_fault_ = factor;
  return g;
}

void Grid::forward(std::span<const double> samples, std::span<Complex> coef) const {
  if (samples.size() != size() || coef.size() != size()) {
    throw std::invalid_argument("forward transform: shape mismatch");
  }
  const int nh = ny_ / 2 + 1;
  std::vector<double> in(samples.begin(), samples.end());
  std::vector<Complex> half(static_cast<std::size_t>(nx_) * nh);
  fftw_execute_dft_r2c(plans_->r2c, in.data(), reinterpret_cast<fftw_complex*>(half.data()));

  const double scale = norm_fault_ / static_cast<double>(size());
  for (int i = 0; i < nx_; ++i) {
    const int mi = (nx_ - i) % nx_;
    for (int j = 0; j < ny_; ++j) {
      Complex v;
      if (j < nh) {
        v = half[static_cast<std::size_t>(i) * nh + j];
      } else {
        v = std::conj(half[static_cast<std::size_t>(mi) * nh + (ny_ - j)]);
      }
      coef[at(i, j)] = v * (scale * detail::origin_sign(j));
    }
  }
}

void Grid::inverse(std::span<const Complex> coef, std::span<double> samples) const {
  if (samples.size() != size() || coef.size() != size()) {
    throw std::invalid_argument("inverse transform: shape mismatch");
  }
  const int nh = ny_ / 2 + 1;
  std::vector<Complex> half(static_cast<std::size_t>(nx_) * nh);
  for (int i = 0; i < nx_; ++i) {
    for (int j = 0; j < nh; ++j) {
      half[static_cast<std::size_t>(i) * nh + j] = coef[at(i, j)] * detail::origin_sign(j);
    }
  }
  fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(half.data()), samples.data());
}

//------------------------------------------------------------------------------

SpectralField& SpectralField::operator+=(const SpectralField& rhs) {
  for (std::size_t k = 0; k < coef_.size(); ++k) coef_[k] += rhs.coef_[k];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& rhs) {
  for (std::size_t k = 0; k < coef_.size(); ++k) coef_[k] -= rhs.coef_[k];
  return *this;
}

SpectralField& SpectralField::operator*=(double factor) {
  for (auto& c : coef_) c *= factor;
  return *this;
}

double SpectralField::hermitian_defect() const {
  const int nx = grid_.nx();
  const int ny = grid_.ny();
  double worst = 0.0;
  for (int i = 0; i < nx; ++i) {
    if (2 * i == nx) continue;
    for (int j = 0; j < ny; ++j) {
      if (2 * j == ny) continue;
      const int mi = (nx - i) % nx;
      const int mj = (ny - j) % ny;
      worst = std::max(worst, std::abs((*this)(mi, mj) - std::conj((*this)(i, j))));
    }
  }
  return worst;
}

SpectralField operator+(SpectralField lhs, const SpectralField& rhs) { return lhs += rhs; }
SpectralField operator-(SpectralField lhs, const SpectralField& rhs) { return lhs -= rhs; }
SpectralField operator*(double factor, SpectralField rhs) { return rhs *= factor; }

SpectralField ZeroModeField::to_field() const {
  SpectralField out(grid);
  for (int j = 0; j < grid.ny(); ++j) out(0, j) = coef[j];
  return out;
}

//------------------------------------------------------------------------------

SpectralField to_spectral(const Grid& grid, std::span<const double> samples) {
  SpectralField out(grid);
  grid.forward(samples, out.coef());
  return out;
}

SpectralField to_spectral(const RealField& samples) {
  return to_spectral(samples.grid, samples.values);
}

RealField from_spectral(const SpectralField& field) {
  RealField out(field.grid());
  field.grid().inverse(field.coef(), out.values);
  return out;
}

SpectralField ddx(const SpectralField& f) {
  const Grid& g = f.grid();
  SpectralField out(g);
  for (int i = 0; i < g.nx(); ++i) {
    const Complex factor(0.0, g.kx(i));
    for (int j = 0; j < g.ny(); ++j) out(i, j) = factor * f(i, j);
  }
  return out;
}

SpectralField ddy(const SpectralField& f, double shear) {
  const Grid& g = f.grid();
  SpectralField out(g);
  for (int i = 0; i < g.nx(); ++i) {
    for (int j = 0; j < g.ny(); ++j) out(i, j) = Complex(0.0, g.ky_eff(i, j, shear)) * f(i, j);
  }
  return out;
}

SpectralField laplacian(const SpectralField& f, double shear) {
  const Grid& g = f.grid();
  SpectralField out(g);
  for (int i = 0; i < g.nx(); ++i) {
    const double kx2 = g.kx(i) * g.kx(i);
    for (int j = 0; j < g.ny(); ++j) {
      const double ky = g.ky_eff(i, j, shear);
      out(i, j) = -(kx2 + ky * ky) * f(i, j);
    }
  }
  return out;
}

void dealias_in_place(SpectralField& f) {
  const Grid& g = f.grid();
  for (int i = 0; i < g.nx(); ++i) {
    for (int j = 0; j < g.ny(); ++j) {
      if (!g.retained(i, j)) f(i, j) = 0.0;
    }
  }
}

SpectralField dealias(const SpectralField& f) {
  SpectralField out = f;
  dealias_in_place(out);
  return out;
}

ZeroModeField project_zero(const SpectralField& f) {
  ZeroModeField out{f.grid(), std::vector<Complex>(f.grid().ny())};
  for (int j = 0; j < f.grid().ny(); ++j) out.coef[j] = f(0, j);
  return out;
}

SpectralField project_nonzero(const SpectralField& f) {
  SpectralField out = f;
  for (int j = 0; j < f.grid().ny(); ++j) out(0, j) = 0.0;
  return out;
}

double l2_norm_spectral(const SpectralField& f) {
  double sum = 0.0;
  for (const auto& c : f.coef()) sum += std::norm(c);
  return std::sqrt(f.grid().area() * sum);
}

double lp_norm(const RealField& f, double p) {
  const Grid& g = f.grid;
  const double cell = g.dx() * g.dy();
  if (std::isinf(p) && p > 0) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
  }
  if (p == 1.0) {
    double s = 0.0;
    for (double v : f.values) s += std::abs(v);
    return s * cell;
  }
  if (p == 2.0) {
    double s = 0.0;
    for (double v : f.values) s += v * v;
    return std::sqrt(s * cell);
  }
  if (p == 4.0) {
    double s = 0.0;
    for (double v : f.values) s += (v * v) * (v * v);
    return std::pow(s * cell, 0.25);
  }
  throw std::invalid_argument("lp_norm: unsupported exponent p=" + std::to_string(p));
}

double lp_norm(const SpectralField& f, double p) { return lp_norm(from_spectral(f), p); }

}  // namespace couette
