//==============================================================================
// dynamics.hpp
// Time integration of the time-rescaled perturbation system around the
// Couette flow (y, 0):
//
//   d_t n + y d_x n - nu Lap n = -nu [div(v n) + div(n^2 grad c) + div(n grad c)]
//   d_t w + y d_x w - nu Lap w = -nu [d_x n + div(v w)]
//   (1 - Lap) c = n,   v = grad^perp Lap^{-1} w,      nu = 1/A
//
// The transport y d_x is removed exactly by working in the sheared frame
// X = x - s y with s the shear phase (ds/dt = 1); the lab y-wavenumber of a
// stored mode is ky - s kx. Diffusion is integrated exactly by an
// integrating factor; the remaining tendencies use a two-stage Heun scheme.
//==============================================================================
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "couette_ks/diagnostics.hpp"
#include "couette_ks/elliptic.hpp"
#include "couette_ks/grid.hpp"

namespace couette {

/// Which nonlinear/coupling terms are active. All off gives the linear
/// sheared heat equation for both n and omega.
struct Couplings {
  bool advection = true;             ///< div(v n)
  bool chemotaxis = true;            ///< div((n^2 + n) grad c)
  bool buoyancy = true;              ///< d_x n forcing of omega
  bool vorticity_advection = true;   ///< div(v omega)

  static Couplings none() { return {false, false, false, false}; }
  bool any() const { return advection || chemotaxis || buoyancy || vorticity_advection; }
};

struct PhysParams {
  Grid grid;
  double A = 1e5;
  double t_end = 20.0;
  double dt_max = 1e-2;
  double dt_min = 1e-8;
  double cfl = 0.5;
  bool adaptive_dt = true;
  /// Remap after this many lattice units (pi/Ly) of shear; 0 disables.
  int remap_period = 0;
  double blowup_factor = 10.0;
  double leak_tol = 1e-8;
  double positivity_tol = 1e-6;
  Couplings couplings{};

  double nu() const { return 1.0 / A; }
  double remap_shear() const { return remap_period * grid.ky_unit(); }
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct SimState {
  double t = 0.0;
  double shear = 0.0;  ///< s, shear accumulated since the last remap
  SpectralField n;
  SpectralField omega;
};

struct Tendencies {
  SpectralField dn;
  SpectralField domega;
  // Side information gathered from the collocation fields of the input state.
  double drift_x = 0.0;  ///< max |w1|, w = (v + (n + 1) grad c) / A
  double drift_y = 0.0;
  double n_max = 0.0;
  double n_min = 0.0;
  double boundary_leak = 0.0;
};

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tendencies excluding Couette transport and diffusion; products dealiased.
/// Throws IntegrationError on non-finite values.
Tendencies nonlinear_rhs(const SimState& state, const PhysParams& params);

/// exp(-nu int_{s0}^{s0+dt} (kx^2 + (ky - s kx)^2) ds) for one mode.
double integrating_factor(double nu, double kx, double ky, double s0, double dt);

/// Relabels coefficients so that the shear phase drops by `units` lattice
/// steps; modes leaving the retained window are discarded.
void remap_shear(SimState& state, int units);

/// Largest dt allowed by the drift CFL condition for the given tendencies.
double cfl_dt(const Tendencies& rhs, const SimState& state, const PhysParams& params);

/// One Heun step with integrating factor, followed by remapping if due.
SimState step(const SimState& state, double dt, const PhysParams& params);

/// Same, reusing tendencies already evaluated at `state`.
SimState step(const SimState& state, const Tendencies& rhs0, double dt, const PhysParams& params);

//------------------------------------------------------------------------------

struct OmegaInit {
  enum class Kind { Zero, Mode };
  Kind kind = Kind::Zero;
  double amplitude = 0.0;
  int kx = 1;
  double sigma_y = 1.0;
};

struct InitialData {
  enum class Kind { GaussianBlob, File };
  Kind kind = Kind::GaussianBlob;
  double mass = 3.0;
  double x0 = 3.141592653589793;
  double y0 = 0.0;
  double sigma = 0.5;
  OmegaInit omega{};
  std::string path;  ///< checkpoint file for Kind::File
};

/// Builds n_in (mass rescaled to hit `mass` by quadrature) and omega_in.
/// Throws std::invalid_argument when the blob is unresolved or touches the
/// truncation boundary.
SimState make_initial(const InitialData& init, const Grid& grid);

//------------------------------------------------------------------------------

enum class Verdict { GlobalLooking, BlowUp, BoundaryLeak, Instability, Inconclusive };
std::string to_string(Verdict v);

struct RunOptions {
  double record_interval = 0.1;  ///< rescaled time between DiagRecords
  double xa_exponent = 0.0;      ///< a in X_a
  std::optional<BootstrapConstants> bootstrap;  ///< heuristic defaults when empty
  bool keep_history = false;     ///< store (t, s, n, omega) at every record
};

/// Everything the run loop carries between steps besides the fields.
/// Serialized next to checkpoints so a resumed run continues bit-for-bit.
struct RunProgress {
  double n_in_linf = 0.0;
  double next_record = 0.0;
  double max_n_linf = 0.0;
  std::optional<double> positivity_violation_time;
  XaAccumulator xa_n;
  XaAccumulator xa_omega;
  BootstrapMonitor bootstrap;
  BootstrapConstants constants;
};

struct RunCallbacks {
  /// Called for every DiagRecord; return false to abort (verdict inconclusive).
  std::function<bool(const DiagRecord&, const SimState&)> on_record;
};

struct RunResult {
  Verdict verdict = Verdict::Inconclusive;
  std::string trigger;
  double t_exit = 0.0;
  SimState final_state;
  RunProgress progress;
  std::vector<DiagRecord> records;
  std::vector<FieldSample> n_history;      ///< full fields at each record (keep_history)
  std::vector<FieldSample> omega_history;
  bool bootstrap_constants_heuristic = true;
};

RunResult run(const PhysParams& params, const SimState& initial, const RunOptions& options,
              const RunCallbacks& callbacks = {});

/// Continues a run from `state` with carried-over progress.
RunResult resume(const PhysParams& params, const SimState& state, RunProgress progress,
                 const RunOptions& options, const RunCallbacks& callbacks = {});

}  // namespace couette
