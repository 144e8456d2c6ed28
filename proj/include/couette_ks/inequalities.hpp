#pragma once

#include <span>
#include <string>

namespace couette {

/// Sharp constant of ||f||_4 <= C ||f||_1^{1/2} ||f'||_2^{1/2} on the line,
/// (4 pi^2 / 9)^{-1/4}.
double sharp_gn_constant();

/// 2 pi / sqrt(3): the mass below which C*^4 M^2 < 3.
double critical_mass();

/// Suppression margin 1 - C*^4 M^2 / 3. Throws std::invalid_argument for M < 0.
double tau(double mass);

struct ThresholdReport {
  double mass;
  double c_star;
  double m_crit;
  double tau;
  bool below_threshold;  ///< tau > 0

  std::string verdict() const { return below_threshold ? "below" : "above"; }
  std::string to_json() const;
};

ThresholdReport threshold_report(double mass);

/// ||f||_4 / (||f||_1^{1/2} ||f'||_2^{1/2}) for samples on a uniform periodic
/// grid of spacing h (derivative taken spectrally). Throws std::domain_error
/// on a zero denominator.
double gn_ratio(std::span<const double> f, double h);

/// ||f'||_2^2 ||f||_1^4 / ||f||_2^6, dilation invariant.
double nash_ratio(std::span<const double> f, double h);

}  // namespace couette
