#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "couette_ks/grid.hpp"

namespace couette {

/// One recorded field with the frame it lives in.
struct FieldSample {
  double t = 0.0;
  double shear = 0.0;
  SpectralField field;
};

/// The four contributions to ||f||_{X_a}, each reported as a norm (the
/// square root of its squared contribution); total = sqrt(sum of squares).
struct XaTerms {
  double sup_l2 = 0.0;       ///< sup_t e^{a A^{-1/3} t} ||f||_2
  double smoothed = 0.0;     ///< ||e^{...} grad^perp Lap^{-1} d_x f||_{L2 L2}
  double damped = 0.0;       ///< A^{-1/6} ||e^{...} f||_{L2 L2}
  double gradient = 0.0;     ///< A^{-1/2} ||e^{...} grad f||_{L2 L2}
  double total = 0.0;
};

/// Incremental X_a evaluation over a recorded time series; time integrals by
/// trapezoid on the recording times.
class XaAccumulator {
 public:
  XaAccumulator() = default;
  XaAccumulator(double a, double A) : a_(a), A_(A) {}

  /// `f` must have no kx = 0 content beyond `mean_tol` relative to its
  /// L2 norm; throws std::invalid_argument otherwise. Times must increase.
  void add(double t, double shear, const SpectralField& f, double mean_tol = 1e-12);
  XaTerms terms() const;
  std::size_t samples() const { return count_; }
  double last_time() const { return last_t_; }

  nlohmann::json to_json() const;
  static XaAccumulator from_json(const nlohmann::json& j);

 private:
  double a_ = 0.0;
  double A_ = 1.0;
  std::size_t count_ = 0;
  double last_t_ = 0.0;
  double last_smoothed_ = 0.0;
  double last_damped_ = 0.0;
  double last_gradient_ = 0.0;
  double sup_sq_ = 0.0;
  double int_smoothed_ = 0.0;
  double int_damped_ = 0.0;
  double int_gradient_ = 0.0;
};

XaTerms xa_norm(std::span<const FieldSample> history, double a, double A);

struct EnergySeries {
  std::vector<double> t;
  std::vector<double> E;
  std::vector<double> running_sup;
};

/// E(t_i) = ||omega_neq||_{X_a} + ||n_neq||_{X_a} over the history up to t_i.
/// The two histories must share their time stamps.
EnergySeries energy_E(std::span<const FieldSample> omega_neq, std::span<const FieldSample> n_neq,
                      double a, double A);

struct BootstrapConstants {
  double K_neq = 1.0;
  double K_inf = 1.0;
  double a = 0.0;
  bool heuristic = false;

  /// Throws std::invalid_argument unless a in [0, 4] and both K > 0.
  void validate() const;
  /// K = 2 (X + 1) with X = E_in resp. ||n_in||_inf; flagged heuristic.
  static BootstrapConstants heuristic_defaults(double E_in, double n_in_linf, double a);
};

struct BootstrapFlags {
  bool E_ok = true;     ///< E(t) <= 2 K_neq
  bool Linf_ok = true;  ///< ||n||_inf <= 2 K_inf
};

BootstrapFlags bootstrap_monitor(double E, double n_linf, const BootstrapConstants& consts);

/// Stateful wrapper that remembers the first violation time of each flag.
class BootstrapMonitor {
 public:
  BootstrapFlags observe(double t, double E, double n_linf, const BootstrapConstants& consts);
  std::optional<double> first_E_violation() const { return first_E_; }
  std::optional<double> first_Linf_violation() const { return first_Linf_; }

  nlohmann::json to_json() const;
  static BootstrapMonitor from_json(const nlohmann::json& j);

 private:
  std::optional<double> first_E_;
  std::optional<double> first_Linf_;
};

struct DecayFit {
  double lambda = 0.0;  ///< values ~ exp(-lambda t)
  double r2 = 1.0;
  std::size_t samples = 0;
  double t_begin = 0.0;
  double t_end = 0.0;
};

/// Least-squares slope of log(values) against t, restricted to [t_lo, t_hi]
/// when given. Needs >= 10 positive samples in the window.
DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> values,
                        std::optional<double> t_lo = std::nullopt,
                        std::optional<double> t_hi = std::nullopt);

/// Default window: after the first e-fold, before dropping to 1e-8 of the
/// initial value.
DecayFit fit_decay_rate_auto(std::span<const double> times, std::span<const double> values);

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  double band_lo = 0.0;  ///< 95% confidence band on the slope
  double band_hi = 0.0;
};

/// Slope of log(lambda) against log(A). Needs >= 3 points spanning >= 2 decades.
ExponentFit enhanced_dissipation_exponent(const std::map<double, double>& rates);

/// Residual of the zero-mode streamwise velocity equation
///   d_t v1_0 - (1/A) d_yy v1_0 + (1/A) d_y (v2_neq v1_neq)_0 = 0
/// by centred differences on a history of vorticity samples. Returns the
/// largest L2 residual over interior samples.
double zero_mode_residual(std::span<const FieldSample> omega_history, double A);

/// max |f| over the outermost 5% of y-rows at each end.
double boundary_leak(const RealField& f);
double boundary_leak(const SpectralField& f);

/// One time sample of every monitored quantity.
struct DiagRecord {
  double t = 0.0;
  double t_phys = 0.0;
  double mass = 0.0;
  double n_linf = 0.0;
  double n0_l2 = 0.0;
  double n0_l4 = 0.0;
  double nneq_l2 = 0.0;
  double nneq_linf = 0.0;
  double omega_l2 = 0.0;
  double omeganeq_l2 = 0.0;
  double v10_linf = 0.0;
  XaTerms xa_n;
  XaTerms xa_omega;
  double E_t = 0.0;
  double min_n = 0.0;
  double boundary_leak = 0.0;
  double dt = 0.0;
  BootstrapFlags bootstrap;
};

/// Instantaneous norms of a state (X_a/bootstrap fields left at defaults).
DiagRecord measure_state(double t, double shear, const SpectralField& n,
                         const SpectralField& omega, double A);

/// Exact CSV header of the per-run diagnostics file.
const std::string& diag_csv_header();
std::string diag_csv_row(const DiagRecord& r);

}  // namespace couette
