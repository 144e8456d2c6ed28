// X_a norm, bootstrap flags, decay-rate and exponent fits, zero-mode
// residual, boundary leak and per-state measurements.

#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "couette_ks/diagnostics.hpp"
#include "couette_ks/dynamics.hpp"
#include "support.hpp"

using namespace couette;
using test_support::kPi;

namespace {

SpectralField mode(const Grid& g, int kx, double ky, double amp) {
  return to_spectral(sample(g, [&](double x, double y) { return amp * std::cos(kx * x + ky * y); }));
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("X_a terms of a constant-in-time single mode") {
  const Grid g = Grid::make(16, 32, kPi);
  const double A = 1000.0;
  const SpectralField f = mode(g, 1, 0.0, 2.0);
  const double l2 = l2_norm_spectral(f);
  XaAccumulator acc(0.0, A);
  for (int k = 0; k <= 10; ++k) acc.add(0.1 * k, 0.0, f);
  const XaTerms x = acc.terms();
  CHECK(x.sup_l2 == doctest::Approx(l2));
  // kx = 1, ky = 0: the smoothing multiplier kx^2 / |k|^2 is one.
  CHECK(x.smoothed == doctest::Approx(l2 * std::sqrt(1.0)));
  CHECK(x.damped == doctest::Approx(std::pow(A, -1.0 / 6.0) * l2));
  CHECK(x.gradient == doctest::Approx(std::pow(A, -0.5) * l2));
  CHECK(x.total == doctest::Approx(std::sqrt(x.sup_l2 * x.sup_l2 + x.smoothed * x.smoothed +
                                             x.damped * x.damped + x.gradient * x.gradient)));
  CHECK(xa_norm(std::vector<FieldSample>{{0.0, 0.0, f}, {1.0, 0.0, f}}, 0.0, A).sup_l2 ==
        doctest::Approx(l2));
}

TEST_CASE("X_a weight and the sheared wavenumber") {
  const Grid g = Grid::make(16, 32, kPi);
  const double A = 1000.0;
  const double a = 2.0;
  const SpectralField f = mode(g, 1, 0.0, 1.0);
  XaAccumulator acc(a, A);
  acc.add(0.0, 0.0, f);
  acc.add(5.0, 3.0, f);  // shear 3: |k|^2 = 1 + 9
  const double l2 = l2_norm_spectral(f);
  CHECK(acc.terms().sup_l2 == doctest::Approx(std::exp(a * std::pow(A, -1.0 / 3.0) * 5.0) * l2));
  const double w = std::exp(2 * a * std::pow(A, -1.0 / 3.0) * 5.0);
  const double smooth_sq = 2.5 * (l2 * l2 + w * l2 * l2 / 10.0);
  CHECK(acc.terms().smoothed == doctest::Approx(std::sqrt(smooth_sq)));
}

TEST_CASE("X_a rejects zero-mode content and non-increasing times") {
  const Grid g = Grid::make(16, 32, kPi);
  XaAccumulator acc(0.0, 10.0);
  CHECK_THROWS_AS(acc.add(0.0, 0.0, mode(g, 0, 1.0, 1.0)), std::invalid_argument);
  acc.add(0.0, 0.0, mode(g, 1, 0.0, 1.0));
  CHECK_THROWS_AS(acc.add(0.0, 0.0, mode(g, 1, 0.0, 1.0)), std::invalid_argument);
}

TEST_CASE("X_a accumulator survives a JSON round trip") {
  const Grid g = Grid::make(16, 32, kPi);
  XaAccumulator acc(1.0, 100.0);
  acc.add(0.0, 0.0, mode(g, 1, 1.0, 1.0));
  acc.add(0.3, 0.3, mode(g, 2, 1.0, 0.5));
  XaAccumulator copy = XaAccumulator::from_json(nlohmann::json::parse(acc.to_json().dump()));
  acc.add(0.7, 0.7, mode(g, 1, 2.0, 0.2));
  copy.add(0.7, 0.7, mode(g, 1, 2.0, 0.2));
  CHECK(acc.terms().total == copy.terms().total);
  CHECK(copy.samples() == 3);
}

TEST_CASE("energy E(t) sums the two X_a norms") {
  const Grid g = Grid::make(16, 32, kPi);
  std::vector<FieldSample> w, n;
  for (int k = 0; k < 5; ++k) {
    w.push_back({0.1 * k, 0.0, mode(g, 1, 0.0, std::exp(-0.1 * k))});
    n.push_back({0.1 * k, 0.0, mode(g, 2, 1.0, 1.0)});
  }
  const EnergySeries e = energy_E(w, n, 0.0, 100.0);
  REQUIRE(e.E.size() == 5);
  CHECK(e.E.back() == doctest::Approx(xa_norm(w, 0.0, 100.0).total + xa_norm(n, 0.0, 100.0).total));
  for (std::size_t k = 1; k < e.E.size(); ++k) CHECK(e.running_sup[k] >= e.running_sup[k - 1]);
  n.pop_back();
  CHECK_THROWS_AS(energy_E(w, n, 0.0, 100.0), std::invalid_argument);
}

TEST_CASE("bootstrap flags use the closed 2K bounds") {
  const BootstrapConstants k{1.0, 3.0, 0.0, false};
  CHECK(bootstrap_monitor(2.0, 6.0, k).E_ok);
  CHECK(bootstrap_monitor(2.0, 6.0, k).Linf_ok);
  CHECK_FALSE(bootstrap_monitor(2.0 + 1e-12, 6.0, k).E_ok);
  CHECK_FALSE(bootstrap_monitor(0.0, 6.1, k).Linf_ok);
  CHECK_THROWS_AS((BootstrapConstants{1.0, 1.0, 5.0, false}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((BootstrapConstants{0.0, 1.0, 1.0, false}.validate()), std::invalid_argument);
  const auto h = BootstrapConstants::heuristic_defaults(1.0, 2.0, 0.5);
  CHECK(h.K_neq == 4.0);
  CHECK(h.K_inf == 6.0);
  CHECK(h.heuristic);

  BootstrapMonitor m;
  m.observe(0.0, 1.0, 1.0, k);
  m.observe(0.5, 2.5, 1.0, k);
  m.observe(0.9, 3.0, 7.0, k);
  CHECK(m.first_E_violation() == 0.5);
  CHECK(m.first_Linf_violation() == 0.9);
  const BootstrapMonitor copy = BootstrapMonitor::from_json(m.to_json());
  CHECK(copy.first_E_violation() == 0.5);
}

TEST_CASE("decay-rate fit") {
  std::vector<double> t, v, c;
  for (int k = 0; k < 50; ++k) {
    t.push_back(0.1 * k);
    v.push_back(3.0 * std::exp(-0.5 * t.back()));
    c.push_back(2.0);
  }
  CHECK(std::abs(fit_decay_rate(t, v).lambda - 0.5) < 1e-6);
  CHECK(std::abs(fit_decay_rate(t, c).lambda) < 1e-12);
  CHECK(std::abs(fit_decay_rate_auto(t, v).lambda - 0.5) < 1e-6);
  CHECK(fit_decay_rate(t, v, 1.0, 2.0).samples == 11);
  CHECK_THROWS_AS(fit_decay_rate(t, v, 1.0, 1.5), std::invalid_argument);
  v[3] = -1.0;
  CHECK_THROWS_AS(fit_decay_rate(t, v), std::invalid_argument);
}

TEST_CASE("enhanced-dissipation exponent on synthetic rates") {
  std::map<double, double> third, one;
  for (double A : {1e3, 1e4, 1e5}) {
    third[A] = 0.7 * std::pow(A, -1.0 / 3.0);
    one[A] = 2.0 / A;
  }
  const ExponentFit f = enhanced_dissipation_exponent(third);
  CHECK(std::abs(f.slope + 1.0 / 3.0) < 1e-6);
  CHECK(f.band_lo <= f.slope);
  CHECK(f.band_hi >= f.slope);
  CHECK(std::abs(enhanced_dissipation_exponent(one).slope + 1.0) < 1e-12);
  CHECK_THROWS_AS(enhanced_dissipation_exponent({{1e3, 1.0}, {1e4, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(enhanced_dissipation_exponent({{1e3, 1.0}, {2e3, 0.5}, {1e4, 0.2}}),
                  std::invalid_argument);
}

TEST_CASE("zero-mode velocity residual is second order in the record spacing") {
  // A pure zero-mode vorticity under diffusion: v1_0 solves the heat equation.
  PhysParams p;
  p.grid = Grid::make(8, 64, kPi);
  p.A = 1.0;
  p.t_end = 0.2;
  p.couplings = Couplings::none();
  p.adaptive_dt = false;
  p.leak_tol = INFINITY;
  SimState s0{0.0, 0.0, SpectralField(p.grid), SpectralField(p.grid)};
  s0.omega = to_spectral(sample(p.grid, [](double, double y) { return std::cos(y); }));
  auto residual = [&](double h) {
    p.dt_max = h;
    RunOptions ro;
    ro.record_interval = h;
    ro.keep_history = true;
    const RunResult r = run(p, s0, ro);
    return zero_mode_residual(r.omega_history, p.A);
  };
  const double r1 = residual(0.02);
  const double r2 = residual(0.01);
  CHECK(r1 < 1e-3);
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.05));
  CHECK_THROWS_AS(zero_mode_residual(std::vector<FieldSample>{}, 1.0), std::invalid_argument);
}

TEST_CASE("boundary leak scans the outer 5% of rows") {
  const Grid g = Grid::make(16, 64, 2 * kPi);
  const RealField blob = sample(g, [](double, double y) { return std::exp(-y * y / 0.5); });
  CHECK(boundary_leak(blob) < 1e-12);
  const RealField edge = sample(g, [&](double, double y) { return y < -2 * kPi + 0.3 ? 1.0 : 0.0; });
  CHECK(boundary_leak(edge) == 1.0);
}

TEST_CASE("measure_state reports mass, zero-mode norms and velocity") {
  const Grid g = Grid::make(32, 64, 2 * kPi);
  const SpectralField n =
      to_spectral(sample(g, [](double x, double y) { return 1.0 + 0.5 * std::cos(x) * std::cos(y); }));
  const SpectralField w = to_spectral(sample(g, [](double, double y) { return std::cos(y); }));
  const DiagRecord r = measure_state(2.0, 0.0, n, w, 100.0);
  CHECK(r.t_phys == doctest::Approx(0.02));
  CHECK(r.mass == doctest::Approx(g.area()));
  CHECK(r.n0_l2 == doctest::Approx(std::sqrt(g.area())));
  CHECK(r.nneq_linf == doctest::Approx(0.5));
  CHECK(r.min_n == doctest::Approx(0.5));
  // omega = cos(y) -> phi = -cos(y) -> v1 = sin(y)
  CHECK(r.v10_linf == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.omeganeq_l2 < 1e-14);
}

}  // TEST_SUITE
