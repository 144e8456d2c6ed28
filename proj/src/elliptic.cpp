#include "couette_ks/elliptic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace couette {

SpectralField solve_chemo(const SpectralField& n, double shear) {
  const Grid& g = n.grid();
  SpectralField c(g);
  for (int i = 0; i < g.nx(); ++i) {
    const double kx2 = g.kx(i) * g.kx(i);
    for (int j = 0; j < g.ny(); ++j) {
      const double ky = g.ky_eff(i, j, shear);
      c(i, j) = n(i, j) / (1.0 + kx2 + ky * ky);
    }
  }
  return c;
}

StreamSolution solve_stream(const SpectralField& omega, double shear, double mean_tol) {
  const Grid& g = omega.grid();
  if (std::abs(omega(0, 0)) > mean_tol) {
    throw std::domain_error("solve_stream: vorticity has nonzero mean (" +
                            std::to_string(std::abs(omega(0, 0))) + ")");
  }
  StreamSolution out{SpectralField(g), SpectralField(g), SpectralField(g)};
  for (int i = 0; i < g.nx(); ++i) {
    const double kx = g.kx(i);
    for (int j = 0; j < g.ny(); ++j) {
      const double ky = g.ky_eff(i, j, shear);
      const double k2 = kx * kx + ky * ky;
      if (k2 == 0.0) continue;  // gauge; also annihilates ky = 0 on the zero mode
      const Complex phi = -omega(i, j) / k2;
      out.phi(i, j) = phi;
      out.v1(i, j) = Complex(0.0, ky) * phi;
      out.v2(i, j) = Complex(0.0, -kx) * phi;
    }
  }
  return out;
}

EllipticRatios elliptic_ratios(const SpectralField& n, double shear) {
  const SpectralField c = solve_chemo(n, shear);
  const SpectralField c_neq = project_nonzero(c);
  const SpectralField n_neq = project_nonzero(n);
  const SpectralField c0 = project_zero(c).to_field();
  const SpectralField n0 = project_zero(n).to_field();

  const double n_neq_l2 = l2_norm_spectral(n_neq);
  const double n0_l2 = l2_norm_spectral(n0);

  EllipticRatios r{};
  r.lap_c_neq_over_n_neq = l2_norm_spectral(laplacian(c_neq, shear)) / n_neq_l2;

  const RealField gx = from_spectral(ddx(c_neq));
  const RealField gy = from_spectral(ddy(c_neq, shear));
  RealField mag(n.grid());
  for (std::size_t k = 0; k < mag.values.size(); ++k) {
    mag.values[k] = std::hypot(gx.values[k], gy.values[k]);
  }
  r.grad_c_neq_l4_over_n_neq = lp_norm(mag, 4.0) / n_neq_l2;
  r.dy_c0_linf_over_n0 = lp_norm(ddy(c0), INFINITY) / n0_l2;
  return r;
}

}  // namespace couette
