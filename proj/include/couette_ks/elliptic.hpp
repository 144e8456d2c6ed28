#pragma once

#include "couette_ks/grid.hpp"

namespace couette {

/// Chemoattractant: (1 - Delta) c = n, diagonal in Fourier space.
SpectralField solve_chemo(const SpectralField& n, double shear = 0.0);

struct StreamSolution {
  SpectralField phi;
  SpectralField v1;  ///< d_y phi
  SpectralField v2;  ///< -d_x phi
};

/// Biot-Savart: Delta phi = omega, v = grad^perp phi = (d_y phi, -d_x phi).
/// Gauge phi(0,0) = 0. Throws std::domain_error when the mean vorticity
/// coefficient exceeds `mean_tol` (ill-posed on the periodic strip).
StreamSolution solve_stream(const SpectralField& omega, double shear = 0.0,
                            double mean_tol = 1e-10);

/// Ratios that the elliptic estimates on the zero and non-zero modes bound
/// by fixed constants.
struct EllipticRatios {
  double lap_c_neq_over_n_neq;   ///< ||Delta c_neq||_2 / ||n_neq||_2
  double grad_c_neq_l4_over_n_neq;  ///< ||grad c_neq||_4 / ||n_neq||_2
  double dy_c0_linf_over_n0;     ///< ||d_y c_0||_inf / ||n_0||_2
};

EllipticRatios elliptic_ratios(const SpectralField& n, double shear = 0.0);

}  // namespace couette
