#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "couette_ks/config.hpp"
#include "couette_ks/dynamics.hpp"

namespace couette {

nlohmann::json progress_to_json(const RunProgress& p);
RunProgress progress_from_json(const nlohmann::json& j);

//------------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  std::string out_dir;                 ///< overrides config output.dir when non-empty
  std::optional<std::string> resume;   ///< checkpoint to continue from
  bool strict = false;                 ///< non-global verdicts become exit code 3
  bool quiet = true;
};

struct SimulateResult {
  RunResult run;
  std::string csv_path;
  std::string checkpoint_path;
  std::string manifest_path;
  int exit_code = 0;
};

/// Runs one configuration and writes <out>/diag.csv, <out>/final.cks (plus
/// its progress sidecar final.cks.json) and <out>/manifest.json. With
/// `resume`, the CSV is appended to and the progress sidecar of the
/// checkpoint is required.
SimulateResult simulate(const RunConfig& config, const SimulateOptions& options);

nlohmann::ordered_json make_manifest(const RunConfig& config, const RunResult& result,
                                     std::optional<std::string> resumed_from);

//------------------------------------------------------------------------------
// sweep

struct SweepOptions {
  std::vector<double> A_values;
  std::vector<double> M_values;
  int parallel = 1;             ///< capped by COUETTE_KS_THREADS when set
  double timeout_s = 0.0;       ///< per point, 0 = none
  double memory_cap_mb = 0.0;   ///< per point estimate, 0 = none
  bool reverse_order = false;   ///< schedule points back to front (testing)
};

struct SweepOutcome {
  double A = 0.0;
  double M = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::string trigger;
  double t_exit = 0.0;
  double max_n_linf = 0.0;
  double rate_n_neq = 0.0;      ///< NaN when no decay window could be fitted
  double rate_omega_neq = 0.0;
  double E_final = 0.0;
};

/// Effective worker count: min(requested, COUETTE_KS_THREADS), at least 1.
int effective_threads(int requested);

/// Runs the (A, M) grid; result sorted by (M, A).
std::vector<SweepOutcome> run_sweep(const RunConfig& base, const SweepOptions& options);

const std::string& sweep_csv_header();
std::string sweep_csv(const std::vector<SweepOutcome>& rows);

/// Pairs (A_lo, A_hi) at equal M where A_lo < A_hi but A_lo looks global and
/// A_hi blows up: more mixing should never make things worse.
std::vector<std::pair<const SweepOutcome*, const SweepOutcome*>> monotonicity_violations(
    const std::vector<SweepOutcome>& rows);

//------------------------------------------------------------------------------
// rate scan

enum class RateScanMode { Linear, Nonlinear, Synthetic };

struct RateScanOptions {
  RateScanMode mode = RateScanMode::Linear;
  std::vector<double> A_values{1e3, 1e4, 1e5};
  int parallel = 1;
  // Linear-mode lattice: a single (kx = 1) mode sheared through a long
  // periodic y-box with lab-frame remapping.
  int linear_nx = 16;
  int linear_ny = 512;
  double linear_ly = 3.141592653589793;
  int linear_remap_period = 1;
  /// Synthetic mode: lambda = synthetic_c * A^synthetic_exponent.
  double synthetic_c = 0.5;
  double synthetic_exponent = -1.0 / 3.0;
};

struct RateRow {
  double A = 0.0;
  double rate_n = 0.0;
  double rate_omega = 0.0;
  double exact_rate = 0.0;  ///< kernel secant rate (linear mode), NaN otherwise
  double t_lo = 0.0;
  double t_hi = 0.0;
};

struct RateScanResult {
  std::vector<RateRow> rows;
  ExponentFit fit_n;
  std::optional<ExponentFit> fit_omega;
};

/// Secant decay rate of the exact sheared heat kernel for mode (kx, ky0)
/// over [t0, t1].
double kernel_secant_rate(double A, double kx, double ky0, double t0, double t1);

/// Fit window [A^{1/3}/2, 2 A^{1/3}].
RateScanResult run_rate_scan(const RunConfig& base, const RateScanOptions& options);

std::string rate_scan_csv(const RateScanResult& result);
nlohmann::ordered_json rate_scan_json(const RateScanResult& result);

}  // namespace couette
