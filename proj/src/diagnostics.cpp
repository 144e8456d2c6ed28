#include "couette_ks/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "couette_ks/elliptic.hpp"

namespace couette {

namespace {

struct ModeSums {
  double l2_sq = 0.0;        // ||f||^2
  double smoothed_sq = 0.0;  // ||grad^perp Lap^{-1} d_x f||^2
  double grad_sq = 0.0;      // ||grad f||^2
  double zero_sq = 0.0;      // ||P0 f||^2
};

ModeSums mode_sums(const SpectralField& f, double shear) {
  const Grid& g = f.grid();
  ModeSums s;
  for (int i = 0; i < g.nx(); ++i) {
    const double kx = g.kx(i);
    for (int j = 0; j < g.ny(); ++j) {
      const double e = std::norm(f(i, j));
      if (e == 0.0) continue;
      const double ky = g.ky_eff(i, j, shear);
      const double k2 = kx * kx + ky * ky;
      s.l2_sq += e;
      s.grad_sq += k2 * e;
      if (i == 0) {
        s.zero_sq += e;
      } else {
        s.smoothed_sq += e * kx * kx / k2;
      }
    }
  }
  const double area = g.area();
  s.l2_sq *= area;
  s.smoothed_sq *= area;
  s.grad_sq *= area;
  s.zero_sq *= area;
  return s;
}

}  // namespace

//------------------------------------------------------------------------------
// X_a

void XaAccumulator::add(double t, double shear, const SpectralField& f, double mean_tol) {
  const ModeSums s = mode_sums(f, shear);
  if (s.zero_sq > mean_tol * mean_tol * std::max(s.l2_sq, 1e-300)) {
    throw std::invalid_argument("X_a norm needs a field without x-zero mode");
  }
  if (count_ > 0 && !(t > last_t_)) {
    throw std::invalid_argument("X_a samples must have increasing times");
  }
  const double w2 = std::exp(2.0 * a_ * std::pow(A_, -1.0 / 3.0) * t);
  const double smoothed = w2 * s.smoothed_sq;
  const double damped = w2 * s.l2_sq * std::pow(A_, -1.0 / 3.0);
  const double gradient = w2 * s.grad_sq / A_;

  sup_sq_ = std::max(sup_sq_, w2 * s.l2_sq);
  if (count_ > 0) {
    const double h = 0.5 * (t - last_t_);
    int_smoothed_ += h * (smoothed + last_smoothed_);
    int_damped_ += h * (damped + last_damped_);
    int_gradient_ += h * (gradient + last_gradient_);
  }
  last_t_ = t;
  last_smoothed_ = smoothed;
  last_damped_ = damped;
  last_gradient_ = gradient;
  ++count_;
}

XaTerms XaAccumulator::terms() const {
  XaTerms x;
  x.sup_l2 = std::sqrt(sup_sq_);
  x.smoothed = std::sqrt(int_smoothed_);
  x.damped = std::sqrt(int_damped_);
  x.gradient = std::sqrt(int_gradient_);
  x.total = std::sqrt(sup_sq_ + int_smoothed_ + int_damped_ + int_gradient_);
  return x;
}

nlohmann::json XaAccumulator::to_json() const {
  return {{"a", a_},
          {"A", A_},
          {"count", count_},
          {"last_t", last_t_},
          {"last", {last_smoothed_, last_damped_, last_gradient_}},
          {"sup_sq", sup_sq_},
          {"integrals", {int_smoothed_, int_damped_, int_gradient_}}};
}

XaAccumulator XaAccumulator::from_json(const nlohmann::json& j) {
  XaAccumulator x(j.at("a").get<double>(), j.at("A").get<double>());
  x.count_ = j.at("count").get<std::size_t>();
  x.last_t_ = j.at("last_t").get<double>();
  x.last_smoothed_ = j.at("last").at(0).get<double>();
  x.last_damped_ = j.at("last").at(1).get<double>();
  x.last_gradient_ = j.at("last").at(2).get<double>();
  x.sup_sq_ = j.at("sup_sq").get<double>();
  x.int_smoothed_ = j.at("integrals").at(0).get<double>();
  x.int_damped_ = j.at("integrals").at(1).get<double>();
  x.int_gradient_ = j.at("integrals").at(2).get<double>();
  return x;
}

XaTerms xa_norm(std::span<const FieldSample> history, double a, double A) {
  XaAccumulator acc(a, A);
  for (const auto& s : history) acc.add(s.t, s.shear, s.field);
  return acc.terms();
}

EnergySeries energy_E(std::span<const FieldSample> omega_neq, std::span<const FieldSample> n_neq,
                      double a, double A) {
  if (omega_neq.size() != n_neq.size()) {
    throw std::invalid_argument("energy_E: histories differ in length");
  }
  EnergySeries out;
  XaAccumulator xo(a, A);
  XaAccumulator xn(a, A);
  double sup = 0.0;
  for (std::size_t k = 0; k < n_neq.size(); ++k) {
    if (omega_neq[k].t != n_neq[k].t) {
      throw std::invalid_argument("energy_E: histories have different time stamps");
    }
    xo.add(omega_neq[k].t, omega_neq[k].shear, omega_neq[k].field);
    xn.add(n_neq[k].t, n_neq[k].shear, n_neq[k].field);
    const double E = xo.terms().total + xn.terms().total;
    sup = std::max(sup, E);
    out.t.push_back(n_neq[k].t);
    out.E.push_back(E);
    out.running_sup.push_back(sup);
  }
  return out;
}

//------------------------------------------------------------------------------
// Bootstrap hypotheses

void BootstrapConstants::validate() const {
  if (!(a >= 0.0 && a <= 4.0)) throw std::invalid_argument("bootstrap: a must lie in [0, 4]");
  if (!(K_neq > 0.0) || !(K_inf > 0.0)) {
    throw std::invalid_argument("bootstrap: K_neq and K_inf must be positive");
  }
}

BootstrapConstants BootstrapConstants::heuristic_defaults(double E_in, double n_in_linf, double a) {
  return {2.0 * (E_in + 1.0), 2.0 * (n_in_linf + 1.0), a, true};
}

BootstrapFlags bootstrap_monitor(double E, double n_linf, const BootstrapConstants& consts) {
  return {E <= 2.0 * consts.K_neq, n_linf <= 2.0 * consts.K_inf};
}

BootstrapFlags BootstrapMonitor::observe(double t, double E, double n_linf,
                                         const BootstrapConstants& consts) {
  const BootstrapFlags f = bootstrap_monitor(E, n_linf, consts);
  if (!f.E_ok && !first_E_) first_E_ = t;
  if (!f.Linf_ok && !first_Linf_) first_Linf_ = t;
  return f;
}

nlohmann::json BootstrapMonitor::to_json() const {
  nlohmann::json j;
  j["first_E_violation"] = first_E_ ? nlohmann::json(*first_E_) : nlohmann::json(nullptr);
  j["first_Linf_violation"] = first_Linf_ ? nlohmann::json(*first_Linf_) : nlohmann::json(nullptr);
  return j;
}

BootstrapMonitor BootstrapMonitor::from_json(const nlohmann::json& j) {
  BootstrapMonitor m;
  if (!j.at("first_E_violation").is_null()) m.first_E_ = j["first_E_violation"].get<double>();
  if (!j.at("first_Linf_violation").is_null()) {
    m.first_Linf_ = j["first_Linf_violation"].get<double>();
  }
  return m;
}

//------------------------------------------------------------------------------
// Decay rates

namespace {

struct LineFit {
  double slope;
  double intercept;
  double r2;
  double stderr_slope;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("degenerate fit window");
  LineFit f{};
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - (f.intercept + f.slope * x[k]);
    sse += r * r;
  }
  // A flat series is fitted perfectly by a flat line.
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.stderr_slope = n > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
  return f;
}

}  // namespace

DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> values,
                        std::optional<double> t_lo, std::optional<double> t_hi) {
  if (times.size() != values.size()) throw std::invalid_argument("fit_decay_rate: size mismatch");
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (t_lo && times[k] < *t_lo) continue;
    if (t_hi && times[k] > *t_hi) continue;
    if (!(values[k] > 0.0)) throw std::invalid_argument("fit_decay_rate: nonpositive value");
    x.push_back(times[k]);
    y.push_back(std::log(values[k]));
  }
  if (x.size() < 10) throw std::invalid_argument("fit_decay_rate: fewer than 10 samples in window");
  const LineFit f = least_squares(x, y);
  return {-f.slope, f.r2, x.size(), x.front(), x.back()};
}

DecayFit fit_decay_rate_auto(std::span<const double> times, std::span<const double> values) {
  if (times.empty() || times.size() != values.size()) {
    throw std::invalid_argument("fit_decay_rate: empty or mismatched series");
  }
  const double v0 = values.front();
  if (!(v0 > 0.0)) throw std::invalid_argument("fit_decay_rate: nonpositive value");
  std::optional<double> lo;
  std::optional<double> hi;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!lo && values[k] <= v0 / std::exp(1.0)) lo = times[k];
    if (values[k] <= 1e-8 * v0) {
      hi = times[k];
      break;
    }
  }
  // No e-fold inside the series: fit everything (covers non-decaying data).
  if (!lo) lo = times.front();
  if (!hi) hi = times.back();
  return fit_decay_rate(times, values, lo, hi);
}

ExponentFit enhanced_dissipation_exponent(const std::map<double, double>& rates) {
  if (rates.size() < 3) throw std::invalid_argument("exponent fit needs at least 3 values of A");
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& [A, lambda] : rates) {
    if (!(A > 0.0) || !(lambda > 0.0)) {
      throw std::invalid_argument("exponent fit needs positive A and rates");
    }
    x.push_back(std::log10(A));
    y.push_back(std::log10(lambda));
  }
  if (x.back() - x.front() < 2.0 - 1e-12) {
    throw std::invalid_argument("exponent fit needs A spanning at least two decades");
  }
  const LineFit f = least_squares(x, y);
  // Two-sided 95% Student t quantiles for n - 2 degrees of freedom.
  static constexpr double t95[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262};
  const std::size_t dof = x.size() - 2;
  const double q = dof <= 9 ? t95[dof - 1] : 1.96;
  ExponentFit out;
  out.slope = f.slope;
  out.intercept = f.intercept;
  out.stderr_slope = f.stderr_slope;
  out.band_lo = f.slope - q * f.stderr_slope;
  out.band_hi = f.slope + q * f.stderr_slope;
  return out;
}

//------------------------------------------------------------------------------

double zero_mode_residual(std::span<const FieldSample> omega_history, double A) {
  if (omega_history.size() < 3) throw std::invalid_argument("zero_mode_residual: need 3 samples");
  const Grid& g = omega_history.front().field.grid();

  auto v10 = [](const FieldSample& s) {
    return project_zero(solve_stream(s.field, s.shear).v1).to_field();
  };

  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < omega_history.size(); ++k) {
    const FieldSample& prev = omega_history[k - 1];
    const FieldSample& cur = omega_history[k];
    const FieldSample& next = omega_history[k + 1];

    SpectralField dt_v = v10(next) - v10(prev);
    dt_v *= 1.0 / (next.t - prev.t);

    const StreamSolution st = solve_stream(cur.field, cur.shear);
    const SpectralField v0 = project_zero(st.v1).to_field();
    const RealField v1n = from_spectral(project_nonzero(st.v1));
    const RealField v2n = from_spectral(project_nonzero(st.v2));
    RealField prod(g);
    for (std::size_t q = 0; q < prod.values.size(); ++q) {
      prod.values[q] = v1n.values[q] * v2n.values[q];
    }
    const SpectralField flux0 = dealias(project_zero(to_spectral(prod)).to_field());

    SpectralField res = dt_v;
    res -= (1.0 / A) * laplacian(v0);
    res += (1.0 / A) * ddy(flux0);
    worst = std::max(worst, l2_norm_spectral(res));
  }
  return worst;
}

double boundary_leak(const RealField& f) {
  const Grid& g = f.grid;
  const int rows = static_cast<int>(std::ceil(0.05 * g.ny()));
  double m = 0.0;
  for (int i = 0; i < g.nx(); ++i) {
    for (int j = 0; j < rows; ++j) {
      m = std::max(m, std::abs(f(i, j)));
      m = std::max(m, std::abs(f(i, g.ny() - 1 - j)));
    }
  }
  return m;
}

double boundary_leak(const SpectralField& f) { return boundary_leak(from_spectral(f)); }

//------------------------------------------------------------------------------

DiagRecord measure_state(double t, double shear, const SpectralField& n,
                         const SpectralField& omega, double A) {
  DiagRecord r;
  r.t = t;
  r.t_phys = t / A;

  const RealField np = from_spectral(n);
  double sum = 0.0;
  double mn = np.values.empty() ? 0.0 : np.values.front();
  for (double v : np.values) {
    sum += v;
    mn = std::min(mn, v);
  }
  const Grid& g = n.grid();
  r.mass = sum * g.dx() * g.dy();
  r.min_n = mn;
  r.n_linf = lp_norm(np, INFINITY);

  const SpectralField n0 = project_zero(n).to_field();
  const RealField n0p = from_spectral(n0);
  r.n0_l2 = lp_norm(n0p, 2.0);
  r.n0_l4 = lp_norm(n0p, 4.0);
  const SpectralField nneq = project_nonzero(n);
  r.nneq_l2 = l2_norm_spectral(nneq);
  r.nneq_linf = lp_norm(nneq, INFINITY);

  r.omega_l2 = l2_norm_spectral(omega);
  r.omeganeq_l2 = l2_norm_spectral(project_nonzero(omega));
  const StreamSolution st = solve_stream(omega, shear, 1e-8);
  r.v10_linf = lp_norm(project_zero(st.v1).to_field(), INFINITY);

  r.boundary_leak = std::max(boundary_leak(np), boundary_leak(omega));
  return r;
}

const std::string& diag_csv_header() {
  static const std::string h =
      "t,t_phys,mass,n_linf,n0_l2,n0_l4,nneq_l2,nneq_linf,omega_l2,omeganeq_l2,v10_linf,E_t,"
      "min_n,boundary_leak,dt";
  return h;
}

std::string diag_csv_row(const DiagRecord& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%.12e,%.12e,%.15e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,"
                "%.12e,%.12e",
                r.t, r.t_phys, r.mass, r.n_linf, r.n0_l2, r.n0_l4, r.nneq_l2, r.nneq_linf,
                r.omega_l2, r.omeganeq_l2, r.v10_linf, r.E_t, r.min_n, r.boundary_leak, r.dt);
  return buf;
}

}  // namespace couette
