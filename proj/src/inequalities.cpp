#include "couette_ks/inequalities.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace couette {

namespace detail {
std::mutex& planner_mutex();
}

double sharp_gn_constant() {
  return std::pow(4.0 * std::numbers::pi * std::numbers::pi / 9.0, -0.25);
}

double critical_mass() { return 2.0 * std::numbers::pi / std::sqrt(3.0); }

double tau(double mass) {
  if (!(mass >= 0.0)) throw std::invalid_argument("tau: mass must be nonnegative");
  // C*^4 = 9 / (4 pi^2) in closed form keeps tau(M_crit) at rounding level.
  const double c4 = 9.0 / (4.0 * std::numbers::pi * std::numbers::pi);
  return 1.0 - c4 * mass * mass / 3.0;
}

ThresholdReport threshold_report(double mass) {
  ThresholdReport r{};
  r.mass = mass;
  r.c_star = sharp_gn_constant();
  r.m_crit = critical_mass();
  r.tau = tau(mass);
  r.below_threshold = r.tau > 0.0;
  return r;
}

std::string ThresholdReport::to_json() const {
  nlohmann::ordered_json j;
  j["M"] = mass;
  j["C_star"] = c_star;
  j["M_crit"] = m_crit;
  j["tau"] = tau;
  j["verdict"] = verdict();
  j["note"] = "below = sufficient condition for suppression at large A; sharpness of M_crit is open";
  return j.dump(2);
}

namespace {

struct ProfileNorms {
  double l1 = 0.0;
  double l2 = 0.0;
  double l4 = 0.0;
  double dl2 = 0.0;
};

std::vector<double> spectral_derivative(std::span<const double> f, double h) {
  const int n = static_cast<int>(f.size());
  const int nh = n / 2 + 1;
  std::vector<double> in(f.begin(), f.end());
  std::vector<std::complex<double>> spec(nh);
  std::vector<double> out(n);
  fftw_plan fwd;
  fftw_plan bwd;
  {
    std::lock_guard lock(detail::planner_mutex());
    fwd = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(spec.data()),
                               FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(spec.data()), out.data(),
                               FFTW_ESTIMATE);
  }
  fftw_execute(fwd);
  const double period = n * h;
  for (int k = 0; k < nh; ++k) {
    const double wave = (2 * k == n) ? 0.0 : 2.0 * std::numbers::pi * k / period;
    spec[k] *= std::complex<double>(0.0, wave) / static_cast<double>(n);
  }
  fftw_execute(bwd);
  {
    std::lock_guard lock(detail::planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  return out;
}

ProfileNorms profile_norms(std::span<const double> f, double h) {
  if (f.size() < 8 || !(h > 0.0)) throw std::invalid_argument("profile too short or bad spacing");
  ProfileNorms p;
  for (double v : f) {
    p.l1 += std::abs(v);
    p.l2 += v * v;
    p.l4 += v * v * v * v;
  }
  for (double d : spectral_derivative(f, h)) p.dl2 += d * d;
  p.l1 *= h;
  p.l2 = std::sqrt(p.l2 * h);
  p.l4 = std::pow(p.l4 * h, 0.25);
  p.dl2 = std::sqrt(p.dl2 * h);
  return p;
}

}  // namespace

double gn_ratio(std::span<const double> f, double h) {
  const ProfileNorms p = profile_norms(f, h);
  const double denom = std::sqrt(p.l1) * std::sqrt(p.dl2);
  if (denom == 0.0) throw std::domain_error("gn_ratio: zero denominator");
  return p.l4 / denom;
}

double nash_ratio(std::span<const double> f, double h) {
  const ProfileNorms p = profile_norms(f, h);
  if (p.l2 == 0.0) throw std::domain_error("nash_ratio: zero denominator");
  return p.dl2 * p.dl2 * std::pow(p.l1, 4) / std::pow(p.l2, 6);
}

}  // namespace couette
