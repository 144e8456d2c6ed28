#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "couette_ks/dynamics.hpp"

namespace couette {

inline constexpr const char* kConfigSchema = "couette-ks/1";
inline constexpr const char* kCodeVersion = "0.1.0";

/// Validation failure carrying a "source:line: /json/pointer: reason" message.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridConfig {
  int nx = 128;
  int ny = 256;
  double ly = 4.0 * 3.141592653589793;
};

struct PhysicsConfig {
  double A = 1e5;
  double a = 0.0;  ///< X_a exponent
  double t_end = 20.0;
  double dt_max = 1e-2;
  double dt_min = 1e-8;
  double cfl = 0.5;
  bool adaptive_dt = true;
  int remap_period = 0;
  Couplings couplings{};
};

struct DiagnosticsConfig {
  double interval = 0.1;
  std::optional<double> K_neq;
  std::optional<double> K_inf;
  double blowup_factor = 10.0;
  double leak_tol = 1e-8;
  double positivity_tol = 1e-6;
};

struct OutputConfig {
  std::string dir = "out";
  bool checkpoint = true;
};

struct RunConfig {
  GridConfig grid;
  PhysicsConfig physics;
  InitialData initial;
  DiagnosticsConfig diagnostics;
  OutputConfig output;

  PhysParams phys_params() const;
  RunOptions run_options() const;

  nlohmann::ordered_json to_json() const;
  /// Everything that influences the numbers (all blocks except output).
  nlohmann::ordered_json numerics_json() const;
  /// FNV-1a 64 of numerics_json(), as 16 hex digits.
  std::string numerics_hash() const;
};

/// Parses and validates; missing keys take the defaults above, unknown keys
/// are rejected. Throws ConfigError.
RunConfig parse_config(const std::string& text, const std::string& source = "config");
RunConfig load_config(const std::string& path);

}  // namespace couette
