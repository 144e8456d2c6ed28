#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "couette_ks/inequalities.hpp"

namespace couette {

struct VerifyOptions {
  double tolerance_scale = 1.0;     ///< multiplies every tolerance
  double normalization_fault = 1.0; ///< != 1 corrupts the forward transform (test hook)
  double mass = 3.0;                ///< mass for the reported ThresholdReport
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      ///< measured error (or ratio, for bound checks)
  double tolerance = 0.0;  ///< the bound it was held to
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  ThresholdReport threshold;
  double tolerance_scale = 1.0;

  bool all_passed() const;
  const CheckResult* find(const std::string& name) const;
  nlohmann::ordered_json to_json() const;
};

/// Built-in oracle suite: transforms, elliptic manufactured solutions,
/// Biot-Savart identities, Poincare bound, sheared heat kernel, GN/Nash
/// ratios, threshold algebra, and short-run mass conservation.
VerifyReport run_verify(const VerifyOptions& options = {});

}  // namespace couette
