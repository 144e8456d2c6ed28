// Chemoattractant and Biot-Savart solves, including the sheared frame.

#include <doctest.h>

#include <cmath>

#include "couette_ks/elliptic.hpp"
#include "support.hpp"

using namespace couette;
using test_support::kPi;

TEST_SUITE("elliptic") {

TEST_CASE("constant density gives constant chemoattractant") {
  const Grid g = Grid::make(16, 32, 2.0);
  const SpectralField n = to_spectral(sample(g, [](double, double) { return 2.5; }));
  const RealField c = from_spectral(solve_chemo(n, 0.3));
  for (double v : c.values) CHECK(v == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("single mode: (1 - Delta) c = n with the sheared wavenumber") {
  const Grid g = Grid::make(16, 64, kPi);
  const double s = 1.25;
  const SpectralField n =
      to_spectral(sample(g, [](double x, double y) { return std::cos(3 * x + 2 * y); }));
  const RealField c = from_spectral(solve_chemo(n, s));
  const double k2 = 9.0 + std::pow(2.0 - s * 3.0, 2);
  double err = 0.0;
  for (int i = 0; i < g.nx(); ++i) {
    for (int j = 0; j < g.ny(); ++j) {
      err = std::max(err, std::abs(c(i, j) - std::cos(3 * g.x(i) + 2 * g.y(j)) / (1.0 + k2)));
    }
  }
  CHECK(err < 1e-14);
}

TEST_CASE("stream function: gauge, velocity convention and mean check") {
  const Grid g = Grid::make(16, 32, kPi);
  // omega = Delta phi for phi = sin(x) cos(y)  (s = 0): omega = -2 phi
  const SpectralField w =
      to_spectral(sample(g, [](double x, double y) { return -2.0 * std::sin(x) * std::cos(y); }));
  const StreamSolution sol = solve_stream(w);
  const RealField phi = from_spectral(sol.phi);
  const RealField v1 = from_spectral(sol.v1);
  const RealField v2 = from_spectral(sol.v2);
  double err = 0.0;
  for (int i = 0; i < g.nx(); ++i) {
    for (int j = 0; j < g.ny(); ++j) {
      const double x = g.x(i);
      const double y = g.y(j);
      err = std::max({err, std::abs(phi(i, j) - std::sin(x) * std::cos(y)),
                      std::abs(v1(i, j) + std::sin(x) * std::sin(y)),
                      std::abs(v2(i, j) + std::cos(x) * std::cos(y))});
    }
  }
  CHECK(err < 1e-14);
  CHECK(sol.phi(0, 0) == Complex(0.0));

  SpectralField bad = w;
  bad(0, 0) = 1e-3;
  CHECK_THROWS_AS(solve_stream(bad), std::domain_error);
}

TEST_CASE("elliptic ratios stay bounded on random data") {
  const Grid g = Grid::make(32, 64, 2 * kPi);
  for (unsigned seed = 0; seed < 5; ++seed) {
    const SpectralField n = dealias(to_spectral(test_support::random_field(g, 100 + seed)));
    for (double s : {0.0, 2.0}) {
      const EllipticRatios r = elliptic_ratios(n, s);
      // |k|^2 / (1 + |k|^2) < 1 mode by mode.
      CHECK(r.lap_c_neq_over_n_neq < 1.0);
      CHECK(std::isfinite(r.grad_c_neq_l4_over_n_neq));
      CHECK(std::isfinite(r.dy_c0_linf_over_n0));
    }
  }
}

}  // TEST_SUITE
