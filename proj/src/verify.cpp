#include "couette_ks/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "couette_ks/dynamics.hpp"
#include "couette_ks/elliptic.hpp"
#include "couette_ks/grid.hpp"

namespace couette {

namespace {

using ojson = nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;

double sup_diff(const RealField& a, const RealField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) m = std::max(m, std::abs(a.values[k] - b.values[k]));
  return m;
}

double sup_abs(const RealField& a) { return lp_norm(a, INFINITY); }

class Suite {
 public:
  explicit Suite(double scale) : scale_(scale) {}

  // Passes when value <= tol * scale.
  void error_check(const std::string& name, double value, double tol, std::string detail = {}) {
    const double t = tol * scale_;
    checks.push_back({name, std::isfinite(value) && value <= t, value, t, std::move(detail)});
  }

  std::vector<CheckResult> checks;

 private:
  double scale_;
};

// Smooth y-localized test function g(y) h(X) with analytic derivatives.
struct Manufactured {
  double sigma = 0.6;
  double g(double y) const { return std::exp(-y * y / (2 * sigma * sigma)); }
  double gy(double y) const { return -y / (sigma * sigma) * g(y); }
  double gyy(double y) const { return (y * y / std::pow(sigma, 4) - 1 / (sigma * sigma)) * g(y); }
  // h has zero x-mean when `mean` is 0.
  double mean = 1.0;
  double h(double x) const { return mean + 0.3 * std::cos(x) + 0.2 * std::sin(2 * x); }
  double hx(double x) const { return -0.3 * std::sin(x) + 0.4 * std::cos(2 * x); }
  double hxx(double x) const { return -0.3 * std::cos(x) - 0.8 * std::sin(2 * x); }
  // Laplacian in lab coordinates of g(y) h(X), X = x - s y.
  double lap(double x, double y, double s) const {
    return (1 + s * s) * g(y) * hxx(x) + gyy(y) * h(x) - 2 * s * gy(y) * hx(x);
  }
};

void transform_checks(Suite& su, const Grid& g) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RealField f(g);
  for (double& v : f.values) v = u(rng);
  const SpectralField c = to_spectral(f);
  su.error_check("transform_roundtrip", sup_diff(from_spectral(c), f), 1e-12);

  double quad = 0.0;
  for (double v : f.values) quad += v * v;
  quad = std::sqrt(quad * g.dx() * g.dy());
  su.error_check("parseval", std::abs(l2_norm_spectral(c) - quad) / quad, 1e-12);

  const RealField one = sample(g, [](double, double) { return 1.0; });
  su.error_check("mean_normalization", std::abs(to_spectral(one)(0, 0) - 1.0), 1e-14);
}

void elliptic_checks(Suite& su, const Grid& g) {
  for (double s : {0.0, 0.7}) {
    const std::string tag = s == 0.0 ? "" : "_sheared";
    Manufactured m;
    const RealField c_exact = sample(g, [&](double x, double y) { return m.g(y) * m.h(x); });
    const RealField n = sample(g, [&](double x, double y) { return m.g(y) * m.h(x) - m.lap(x, y, s); });
    const RealField c = from_spectral(solve_chemo(to_spectral(n), s));
    su.error_check("chemo_manufactured" + tag, sup_diff(c, c_exact) / sup_abs(c_exact), 1e-8);

    Manufactured p;
    p.mean = 0.0;
    const RealField phi_exact = sample(g, [&](double x, double y) { return p.g(y) * p.h(x); });
    const RealField omega = sample(g, [&](double x, double y) { return p.lap(x, y, s); });
    const StreamSolution sol = solve_stream(to_spectral(omega), s);
    const RealField v1_exact = sample(g, [&](double x, double y) {
      return p.gy(y) * p.h(x) - s * p.g(y) * p.hx(x);
    });
    const RealField v2_exact = sample(g, [&](double x, double y) { return -p.g(y) * p.hx(x); });
    const double err = std::max({sup_diff(from_spectral(sol.phi), phi_exact) / sup_abs(phi_exact),
                                 sup_diff(from_spectral(sol.v1), v1_exact) / sup_abs(v1_exact),
                                 sup_diff(from_spectral(sol.v2), v2_exact) / sup_abs(v2_exact)});
    su.error_check("stream_manufactured" + tag, err, 1e-8);
  }
}

// Random smooth zero-mean vorticity: d_y v1 - d_x v2 = omega and div v = 0.
void biot_savart_checks(Suite& su, const Grid& g) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd(0.0, 1.0);
  SpectralField w(g);
  for (int i = 0; i < g.nx(); ++i) {
    for (int j = 0; j < g.ny(); ++j) {
      const double k2 = g.kx(i) * g.kx(i) + g.ky(j) * g.ky(j);
      w(i, j) = Complex(nd(rng), nd(rng)) * std::exp(-0.5 * k2);
    }
  }
  w = to_spectral(from_spectral(w));  // hermitian projection
  w(0, 0) = 0.0;
  double worst = 0.0;
  for (double s : {0.0, 1.3}) {
    const StreamSolution sol = solve_stream(w, s);
    const SpectralField curl = ddy(sol.v1, s) - ddx(sol.v2);
    const SpectralField div = ddx(sol.v1) + ddy(sol.v2, s);
    const double scale = l2_norm_spectral(w);
    worst = std::max({worst, l2_norm_spectral(curl + (-1.0) * w) / scale,
                      l2_norm_spectral(div) / scale});
  }
  su.error_check("biot_savart_identity", worst, 1e-10, "d_y v1 - d_x v2 = omega, div v = 0");

  // ||grad v_neq||_2 = ||omega_neq||_2
  const SpectralField wn = project_nonzero(w);
  double energy = 0.0;
  for (double s : {0.0, 1.3}) {
    const StreamSolution sol = solve_stream(wn, s);
    const double gv = std::sqrt(std::pow(l2_norm_spectral(ddx(sol.v1)), 2) +
                                std::pow(l2_norm_spectral(ddy(sol.v1, s)), 2) +
                                std::pow(l2_norm_spectral(ddx(sol.v2)), 2) +
                                std::pow(l2_norm_spectral(ddy(sol.v2, s)), 2));
    energy = std::max(energy, std::abs(gv - l2_norm_spectral(wn)) / l2_norm_spectral(wn));
  }
  su.error_check("biot_savart_energy", energy, 1e-10, "||grad v_neq|| = ||omega_neq||");
}

// ||f||_2 <= ||d_x f||_2 for fields without kx = 0 content.
void poincare_check(Suite& su, const Grid& g) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> nd(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    // Smooth random fields concentrated at low |kx| approach the bound.
    const double decay = 0.2 + 0.1 * (trial % 10);
    SpectralField f(g);
    for (int i = 0; i < g.nx(); ++i) {
      for (int j = 0; j < g.ny(); ++j) {
        f(i, j) = Complex(nd(rng), nd(rng)) * std::exp(-decay * g.kx(i) * g.kx(i) - 0.1 * g.ky(j) * g.ky(j));
      }
    }
    const SpectralField fn = project_nonzero(dealias(to_spectral(from_spectral(f))));
    worst = std::max(worst, l2_norm_spectral(fn) / l2_norm_spectral(ddx(fn)));
  }
  su.error_check("poincare_nonzero_modes", worst - 1.0, 1e-12, "max ||f||/||d_x f|| - 1");
}

// Single sheared Fourier mode under pure diffusion against the closed form,
// crossing several remaps.
void kernel_check(Suite& su) {
  PhysParams p;
  p.grid = Grid::make(16, 256, kPi);
  p.A = 100.0;
  p.t_end = 10.0;
  p.dt_max = 0.05;
  p.adaptive_dt = false;
  p.remap_period = 1;
  p.couplings = Couplings::none();
  p.leak_tol = INFINITY;
  const int kx = 2;
  const double ky0 = 3.0;
  SimState st{0.0, 0.0, SpectralField(p.grid), SpectralField(p.grid)};
  st.n = to_spectral(sample(p.grid, [&](double x, double y) { return std::cos(kx * x + ky0 * y); }));
  st.omega = st.n;
  while (st.t < p.t_end - 1e-12) st = step(st, p.dt_max, p);
  // Closed form: amplitude exp(-nu int (kx^2 + (ky0 - t kx)^2)), lab phase kx x + (ky0 - t kx) y.
  const double t = st.t;
  const double amp = std::exp(-(kx * kx * t + (std::pow(ky0, 3) - std::pow(ky0 - t * kx, 3)) / (3.0 * kx)) / p.A);
  // Compare in the lab frame: evaluate at sheared-frame points x = X + s y.
  const RealField num = from_spectral(st.n);
  double err = 0.0;
  for (int i = 0; i < p.grid.nx(); ++i) {
    for (int j = 0; j < p.grid.ny(); ++j) {
      const double X = p.grid.x(i);
      const double y = p.grid.y(j);
      const double x = X + st.shear * y;
      const double exact = amp * std::cos(kx * (x - t * y) + ky0 * y);
      err = std::max(err, std::abs(num(i, j) - exact));
    }
  }
  su.error_check("sheared_heat_kernel", err / amp, 1e-6);
}

void inequality_checks(Suite& su) {
  const double L = 20.0;
  const int N = 4096;
  const double h = 2 * L / N;
  auto profile = [&](double lambda) {
    std::vector<double> f(N);
    for (int j = 0; j < N; ++j) {
      const double y = -L + j * h;
      f[j] = lambda * std::exp(-lambda * lambda * y * y);
    }
    return f;
  };
  const std::vector<double> gauss = profile(1.0);
  // Closed-form Gaussian integrals: ||f||_1 = sqrt(pi), ||f||_4 = (sqrt(pi)/2)^{1/4},
  // ||f'||_2^2 = sqrt(pi/2).
  const double l1 = std::sqrt(kPi);
  const double l4 = std::pow(std::sqrt(kPi) / 2.0, 0.25);
  const double dl2 = std::pow(kPi / 2.0, 0.25);
  const double closed = l4 / (std::sqrt(l1) * std::sqrt(dl2));
  const double gn = gn_ratio(gauss, h);
  su.error_check("gn_gaussian_closed_form", std::abs(gn - closed), 1e-8);
  su.error_check("gn_below_sharp_constant", gn / sharp_gn_constant() - 1.0 - 1e-3, 0.0,
                 "ratio / C* - (1 + 1e-3)");

  double dil = 0.0;
  for (double lam : {0.5, 2.0}) {
    const std::vector<double> fl = profile(lam);
    dil = std::max(dil, std::abs(gn_ratio(fl, h) - gn));
    dil = std::max(dil, std::abs(nash_ratio(fl, h) - nash_ratio(gauss, h)) / nash_ratio(gauss, h));
  }
  su.error_check("gn_nash_dilation_invariance", dil, 1e-8);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_gn = 0.0;
  double min_nash = INFINITY;
  for (int trial = 0; trial < 50; ++trial) {
    const int bumps = 1 + static_cast<int>(u(rng) * 4);
    std::vector<double> f(N, 0.0);
    for (int b = 0; b < bumps; ++b) {
      const double c = -5.0 + 10.0 * u(rng);
      const double w = 0.3 + 1.5 * u(rng);
      const double a = 0.2 + u(rng);
      for (int j = 0; j < N; ++j) {
        const double y = -L + j * h;
        f[j] += a * std::exp(-(y - c) * (y - c) / (2 * w * w));
      }
    }
    worst_gn = std::max(worst_gn, gn_ratio(f, h) / sharp_gn_constant());
    min_nash = std::min(min_nash, nash_ratio(f, h));
  }
  su.error_check("gn_random_bumps", worst_gn - 1.0 - 1e-3, 0.0, "max ratio / C* - (1 + 1e-3)");
  su.error_check("nash_random_bumps_positive", -min_nash, 0.0, "-min ratio");

  const double C4 = std::pow(sharp_gn_constant(), 4);
  const double M = critical_mass();
  double alg = std::abs(tau(M)) + std::abs(tau(0.0) - 1.0);
  for (double m : {0.5, 1.0, 3.0, 4.0}) alg = std::max(alg, std::abs(3 * tau(m) + C4 * m * m - 3));
  su.error_check("threshold_algebra", alg, 1e-12);
  const double chain = std::max(std::abs(C4 - 9.0 / (4 * kPi * kPi)) / C4,
                                std::abs(std::sqrt(3.0 / C4) - 2 * kPi / std::sqrt(3.0)) / M);
  su.error_check("sharp_constant_chain", chain, 1e-14);
}

// Short full-coupling run: the mean of n is exactly conserved.
void mass_check(Suite& su) {
  double worst = 0.0;
  for (double A : {1.0, 1e5}) {
    PhysParams p;
    p.grid = Grid::make(64, 128, 2 * kPi);
    p.A = A;
    p.t_end = 0.2;
    InitialData init;
    init.sigma = 0.5;
    init.omega = {OmegaInit::Kind::Mode, 0.5, 1, 0.7};
    const SimState s0 = make_initial(init, p.grid);
    RunOptions ro;
    ro.record_interval = 0.05;
    const RunResult r = run(p, s0, ro);
    for (const auto& rec : r.records) worst = std::max(worst, std::abs(rec.mass - init.mass) / init.mass);
  }
  su.error_check("mass_conservation", worst, 1e-8);
}

}  // namespace

bool VerifyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* VerifyReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

ojson VerifyReport::to_json() const {
  ojson j;
  j["all_passed"] = all_passed();
  j["tolerance_scale"] = tolerance_scale;
  ojson arr = ojson::array();
  for (const auto& c : checks) {
    ojson e{{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"tolerance", c.tolerance}};
    if (!c.detail.empty()) e["detail"] = c.detail;
    arr.push_back(e);
  }
  j["checks"] = arr;
  j["threshold"] = ojson::parse(threshold.to_json());
  return j;
}

VerifyReport run_verify(const VerifyOptions& options) {
  if (!(options.tolerance_scale > 0.0)) {
    throw std::invalid_argument("verify: tolerance scale must be positive");
  }
  Suite su(options.tolerance_scale);
  Grid g = Grid::make(64, 256, 2 * kPi);
  if (options.normalization_fault != 1.0) g = g.with_normalization_fault(options.normalization_fault);
  transform_checks(su, g);
  const Grid clean = Grid::make(64, 256, 2 * kPi);
  elliptic_checks(su, clean);
  biot_savart_checks(su, clean);
  poincare_check(su, clean);
  kernel_check(su);
  inequality_checks(su);
  mass_check(su);

  VerifyReport rep;
  rep.checks = std::move(su.checks);
  rep.threshold = threshold_report(options.mass);
  rep.tolerance_scale = options.tolerance_scale;
  return rep;
}

}  // namespace couette
