#include "couette_ks/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "couette_ks/checkpoint.hpp"

namespace couette {

void PhysParams::validate() const {
  if (grid.nx() == 0) throw std::invalid_argument("physics: grid not initialised");
  if (!(A >= 1.0)) throw std::invalid_argument("physics.A: must be >= 1");
  if (!(t_end > 0.0)) throw std::invalid_argument("physics.t_end: must be positive");
  if (!(dt_max > 0.0)) throw std::invalid_argument("physics.dt_max: must be positive");
  if (!(dt_min > 0.0) || dt_min > dt_max) {
    throw std::invalid_argument("physics.dt_min: must be positive and <= dt_max");
  }
  if (!(cfl > 0.0)) throw std::invalid_argument("physics.cfl: must be positive");
  if (remap_period < 0) throw std::invalid_argument("physics.remap_period: must be >= 0");
  if (!(blowup_factor > 1.0)) throw std::invalid_argument("diagnostics.blowup_factor: must be > 1");
  if (!(leak_tol > 0.0)) throw std::invalid_argument("diagnostics.leak_tol: must be positive");
  if (!(positivity_tol >= 0.0)) {
    throw std::invalid_argument("diagnostics.positivity_tol: must be nonnegative");
  }
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::GlobalLooking: return "global-looking";
    case Verdict::BlowUp: return "blow-up";
    case Verdict::BoundaryLeak: return "boundary-leak";
    case Verdict::Instability: return "instability";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

//------------------------------------------------------------------------------

namespace {

void require_finite(const RealField& f, const char* what) {
  for (double v : f.values) {
    if (!std::isfinite(v)) throw IntegrationError(std::string("non-finite value in ") + what);
  }
}

// Spectral divergence of a flux (fx, fy) given on the collocation grid,
// scaled by `factor` and accumulated into `out` on the retained modes.
void add_divergence(SpectralField& out, const RealField& fx, const RealField& fy, double factor,
                    double shear) {
  const Grid& g = out.grid();
  const SpectralField hx = to_spectral(fx);
  const SpectralField hy = to_spectral(fy);
  for (int i = 0; i < g.nx(); ++i) {
    const double kx = g.kx(i);
    for (int j = 0; j < g.ny(); ++j) {
      if (!g.retained(i, j)) continue;
      const double ky = g.ky_eff(i, j, shear);
      out(i, j) += factor * Complex(0.0, 1.0) * (kx * hx(i, j) + ky * hy(i, j));
    }
  }
}

}  // namespace

Tendencies nonlinear_rhs(const SimState& state, const PhysParams& params) {
  const Grid& g = state.n.grid();
  const double s = state.shear;
  const double nu = params.nu();
  const Couplings& cp = params.couplings;

  Tendencies out{SpectralField(g), SpectralField(g)};
  const RealField n = from_spectral(state.n);
  require_finite(n, "n");
  out.n_max = -std::numeric_limits<double>::infinity();
  out.n_min = std::numeric_limits<double>::infinity();
  for (double v : n.values) {
    out.n_max = std::max(out.n_max, v);
    out.n_min = std::min(out.n_min, v);
  }
  if (!cp.any()) return out;

  const std::size_t npts = g.size();
  RealField v1(g);
  RealField v2(g);
  if (cp.advection || cp.vorticity_advection) {
    const StreamSolution st = solve_stream(state.omega, s);
    v1 = from_spectral(st.v1);
    v2 = from_spectral(st.v2);
  }

  if (cp.advection || cp.chemotaxis) {
    RealField fx(g);
    RealField fy(g);
    RealField cx(g);
    RealField cy(g);
    if (cp.chemotaxis) {
      const SpectralField c = solve_chemo(state.n, s);
      cx = from_spectral(ddx(c));
      cy = from_spectral(ddy(c, s));
    }
    double wx = 0.0;
    double wy = 0.0;
    for (std::size_t q = 0; q < npts; ++q) {
      // Flux n v + (n^2 + n) grad c = n (v + (n + 1) grad c).
      double ux = 0.0;
      double uy = 0.0;
      if (cp.advection) {
        ux += v1.values[q];
        uy += v2.values[q];
      }
      if (cp.chemotaxis) {
        ux += (n.values[q] + 1.0) * cx.values[q];
        uy += (n.values[q] + 1.0) * cy.values[q];
      }
      fx.values[q] = n.values[q] * ux;
      fy.values[q] = n.values[q] * uy;
      wx = std::max(wx, std::abs(ux));
      wy = std::max(wy, std::abs(uy));
    }
    require_finite(fx, "cell flux");
    require_finite(fy, "cell flux");
    out.drift_x = nu * wx;
    out.drift_y = nu * wy;
    add_divergence(out.dn, fx, fy, -nu, s);
  } else if (cp.vorticity_advection) {
    double wx = 0.0;
    double wy = 0.0;
    for (std::size_t q = 0; q < npts; ++q) {
      wx = std::max(wx, std::abs(v1.values[q]));
      wy = std::max(wy, std::abs(v2.values[q]));
    }
    out.drift_x = nu * wx;
    out.drift_y = nu * wy;
  }

  if (cp.buoyancy) {
    for (int i = 0; i < g.nx(); ++i) {
      const Complex factor(0.0, -nu * g.kx(i));
      for (int j = 0; j < g.ny(); ++j) {
        if (g.retained(i, j)) out.domega(i, j) += factor * state.n(i, j);
      }
    }
  }
  if (cp.vorticity_advection) {
    const RealField w = from_spectral(state.omega);
    require_finite(w, "omega");
    RealField gx(g);
    RealField gy(g);
    for (std::size_t q = 0; q < npts; ++q) {
      gx.values[q] = v1.values[q] * w.values[q];
      gy.values[q] = v2.values[q] * w.values[q];
    }
    add_divergence(out.domega, gx, gy, -nu, s);
  }
  return out;
}

double integrating_factor(double nu, double kx, double ky, double s0, double dt) {
  // int_{s0}^{s0+dt} (ky - s kx)^2 ds = dt (a^2 + a b + b^2) / 3 with
  // a, b the lab wavenumbers at both ends; exact, and free of the
  // cancellation in (a^3 - b^3) / (3 kx).
  const double a = ky - s0 * kx;
  const double b = ky - (s0 + dt) * kx;
  const double integral = dt * (kx * kx + (a * a + a * b + b * b) / 3.0);
  return std::exp(-nu * integral);
}

void remap_shear(SimState& state, int units) {
  auto shift = [units](const SpectralField& f) {
    const Grid& g = f.grid();
    SpectralField out(g);
    for (int i = 0; i < g.nx(); ++i) {
      const int kx = g.kx_index(i);
      for (int j = 0; j < g.ny(); ++j) {
        if (f(i, j) == Complex(0.0, 0.0)) continue;
        const int m = g.ky_index(j) - units * kx;
        if (2 * std::abs(m) >= g.ny()) continue;
        const int jn = m >= 0 ? m : m + g.ny();
        if (g.retained(i, jn)) out(i, jn) = f(i, j);
      }
    }
    return out;
  };
  state.n = shift(state.n);
  state.omega = shift(state.omega);
  state.shear -= units * state.n.grid().ky_unit();
}

double cfl_dt(const Tendencies& rhs, const SimState& state, const PhysParams& params) {
  const Grid& g = state.n.grid();
  const double kx_max = g.nx() / 3;
  const double ky_max = (g.ny() / 3) * g.ky_unit() + std::abs(state.shear) * kx_max;
  const double rate = rhs.drift_x * kx_max + rhs.drift_y * ky_max;
  if (rate == 0.0) return std::numeric_limits<double>::infinity();
  return params.cfl / rate;
}

SimState step(const SimState& state, double dt, const PhysParams& params) {
  return step(state, nonlinear_rhs(state, params), dt, params);
}

SimState step(const SimState& state, const Tendencies& rhs0, double dt, const PhysParams& params) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  const Grid& g = state.n.grid();
  const double nu = params.nu();
  const double s0 = state.shear;

  std::vector<double> factor(g.size());
  for (int i = 0; i < g.nx(); ++i) {
    for (int j = 0; j < g.ny(); ++j) {
      factor[g.at(i, j)] = integrating_factor(nu, g.kx(i), g.ky(j), s0, dt);
    }
  }

  SimState next{state.t + dt, s0 + dt, SpectralField(g), SpectralField(g)};
  const bool nonlinear = params.couplings.any();
  auto n0 = state.n.coef();
  auto w0 = state.omega.coef();
  auto dn0 = rhs0.dn.coef();
  auto dw0 = rhs0.domega.coef();

  if (!nonlinear) {
    for (std::size_t q = 0; q < g.size(); ++q) {
      next.n.coef()[q] = factor[q] * n0[q];
      next.omega.coef()[q] = factor[q] * w0[q];
    }
  } else {
    SimState pred{state.t + dt, s0 + dt, SpectralField(g), SpectralField(g)};
    for (std::size_t q = 0; q < g.size(); ++q) {
      pred.n.coef()[q] = factor[q] * (n0[q] + dt * dn0[q]);
      pred.omega.coef()[q] = factor[q] * (w0[q] + dt * dw0[q]);
    }
    const Tendencies rhs1 = nonlinear_rhs(pred, params);
    auto dn1 = rhs1.dn.coef();
    auto dw1 = rhs1.domega.coef();
    const double h = 0.5 * dt;
    for (std::size_t q = 0; q < g.size(); ++q) {
      next.n.coef()[q] = factor[q] * (n0[q] + h * dn0[q]) + h * dn1[q];
      next.omega.coef()[q] = factor[q] * (w0[q] + h * dw0[q]) + h * dw1[q];
    }
  }

  if (params.remap_period > 0) {
    const double period = params.remap_shear();
    while (next.shear >= period * (1.0 - 1e-12)) remap_shear(next, params.remap_period);
  }
  return next;
}

//------------------------------------------------------------------------------

SimState make_initial(const InitialData& init, const Grid& grid) {
  if (!(init.mass >= 0.0)) throw std::invalid_argument("initial.mass: must be nonnegative");
  SimState st{0.0, 0.0, SpectralField(grid), SpectralField(grid)};

  if (init.kind == InitialData::Kind::File) {
    const Checkpoint ck = read_checkpoint(init.path);
    if (!ck.n.grid().same_shape(grid)) {
      throw std::invalid_argument("initial.path: checkpoint grid differs from configured grid");
    }
    st.shear = ck.shear;
    st.n = ck.n;
    st.omega = ck.omega;
    if (init.mass > 0.0) {
      const double m = st.n(0, 0).real() * grid.area();
      if (!(m > 0.0)) throw std::invalid_argument("initial.path: checkpoint has no mass");
      st.n *= init.mass / m;
    }
    return st;
  }

  if (init.mass > 0.0) {
    if (!(init.sigma > 0.0)) throw std::invalid_argument("initial.sigma: must be positive");
    if (init.sigma < std::max(grid.dx(), grid.dy())) {
      throw std::invalid_argument("initial.sigma: blob unresolved, mass target unreachable at "
                                  "this resolution");
    }
    const double two_pi = 2.0 * std::numbers::pi;
    const double inv2s2 = 1.0 / (2.0 * init.sigma * init.sigma);
    const RealField blob = sample(grid, [&](double x, double y) {
      double v = 0.0;
      for (int image = -3; image <= 3; ++image) {
        const double dx = x - init.x0 + image * two_pi;
        v += std::exp(-dx * dx * inv2s2);
      }
      const double dy = y - init.y0;
      return v * std::exp(-dy * dy * inv2s2);
    });
    st.n = dealias(to_spectral(blob));
    const double m = st.n(0, 0).real() * grid.area();
    if (!(m > 0.0)) throw std::invalid_argument("initial: blob has no mass on this grid");
    st.n *= init.mass / m;

    const RealField np = from_spectral(st.n);
    const double peak = lp_norm(np, INFINITY);
    if (boundary_leak(np) > 1e-12 * std::max(1.0, peak)) {
      throw std::invalid_argument("initial: blob touches the truncation boundary (leak >= 1e-12)");
    }
    const double lowest = *std::min_element(np.values.begin(), np.values.end());
    if (lowest < -1e-10 * peak) {
      throw std::invalid_argument("initial: blob unresolved, truncation undershoot too large");
    }
  }

  if (init.omega.kind == OmegaInit::Kind::Mode && init.omega.amplitude != 0.0) {
    if (init.omega.kx < 1) throw std::invalid_argument("initial.omega.kx: must be >= 1");
    if (!(init.omega.sigma_y > 0.0)) {
      throw std::invalid_argument("initial.omega.sigma_y: must be positive");
    }
    const OmegaInit& w = init.omega;
    const RealField field = sample(grid, [&](double x, double y) {
      const double dy = y - init.y0;
      return w.amplitude * std::cos(w.kx * (x - init.x0)) *
             std::exp(-dy * dy / (2.0 * w.sigma_y * w.sigma_y));
    });
    st.omega = dealias(to_spectral(field));
    st.omega(0, 0) = 0.0;
    if (boundary_leak(st.omega) > 1e-12 * std::max(1.0, std::abs(w.amplitude))) {
      throw std::invalid_argument("initial.omega: vorticity touches the truncation boundary");
    }
  }
  return st;
}

//------------------------------------------------------------------------------

RunResult run(const PhysParams& params, const SimState& initial, const RunOptions& options,
              const RunCallbacks& callbacks) {
  params.validate();
  RunProgress prog;
  prog.n_in_linf = lp_norm(initial.n, INFINITY);
  prog.next_record = initial.t;
  prog.max_n_linf = prog.n_in_linf;
  prog.xa_n = XaAccumulator(options.xa_exponent, params.A);
  prog.xa_omega = XaAccumulator(options.xa_exponent, params.A);
  const double E_in = l2_norm_spectral(project_nonzero(initial.omega)) +
                      l2_norm_spectral(project_nonzero(initial.n));
  prog.constants = options.bootstrap.value_or(
      BootstrapConstants::heuristic_defaults(E_in, prog.n_in_linf, options.xa_exponent));
  prog.constants.validate();
  return resume(params, initial, std::move(prog), options, callbacks);
}

RunResult resume(const PhysParams& params, const SimState& state, RunProgress progress,
                 const RunOptions& options, const RunCallbacks& callbacks) {
  params.validate();
  if (!(options.record_interval > 0.0)) {
    throw std::invalid_argument("diagnostics.interval: must be positive");
  }
  if (!state.n.grid().same_shape(params.grid)) {
    throw std::invalid_argument("state grid differs from configured grid");
  }

  RunResult res;
  res.progress = std::move(progress);
  res.bootstrap_constants_heuristic = res.progress.constants.heuristic;
  RunProgress& prog = res.progress;
  SimState st = state;
  double last_dt = 0.0;
  // A resumed run has already recorded the checkpoint time.
  double last_record_t = prog.xa_n.samples() > 0 ? prog.xa_n.last_time()
                                                 : -std::numeric_limits<double>::infinity();
  const double t_tol = 1e-9 * options.record_interval;

  auto take_record = [&]() -> bool {
    if (st.t <= last_record_t) return true;
    DiagRecord r = measure_state(st.t, st.shear, st.n, st.omega, params.A);
    r.dt = last_dt;
    const SpectralField n_neq = project_nonzero(st.n);
    const SpectralField w_neq = project_nonzero(st.omega);
    prog.xa_n.add(st.t, st.shear, n_neq);
    prog.xa_omega.add(st.t, st.shear, w_neq);
    r.xa_n = prog.xa_n.terms();
    r.xa_omega = prog.xa_omega.terms();
    r.E_t = r.xa_n.total + r.xa_omega.total;
    r.bootstrap = prog.bootstrap.observe(st.t, r.E_t, r.n_linf, prog.constants);
    if (options.keep_history) {
      res.n_history.push_back({st.t, st.shear, st.n});
      res.omega_history.push_back({st.t, st.shear, st.omega});
    }
    res.records.push_back(r);
    last_record_t = st.t;
    while (prog.next_record <= st.t + t_tol) prog.next_record += options.record_interval;
    if (callbacks.on_record && !callbacks.on_record(r, st)) return false;
    return true;
  };

  auto finish = [&](Verdict v, std::string trigger) {
    res.verdict = v;
    res.trigger = std::move(trigger);
    res.t_exit = st.t;
    res.final_state = st;
    return res;
  };

  const double t_end = params.t_end;
  while (true) {
    Tendencies rhs;
    try {
      rhs = nonlinear_rhs(st, params);
    } catch (const IntegrationError& e) {
      return finish(Verdict::Instability, e.what());
    }
    const double n_linf = std::max(std::abs(rhs.n_max), std::abs(rhs.n_min));
    prog.max_n_linf = std::max(prog.max_n_linf, n_linf);

    const bool due = st.t >= prog.next_record - t_tol || st.t >= t_end - t_tol;
    if (due) {
      if (!take_record()) return finish(Verdict::Inconclusive, "aborted");
      if (!res.records.empty() && res.records.back().boundary_leak > params.leak_tol) {
        return finish(Verdict::BoundaryLeak, "boundary-leak");
      }
    }
    if (n_linf >= params.blowup_factor * prog.n_in_linf && prog.n_in_linf > 0.0) {
      take_record();
      return finish(Verdict::BlowUp, "linf-growth");
    }
    if (rhs.n_min < -params.positivity_tol * n_linf && !prog.positivity_violation_time) {
      prog.positivity_violation_time = st.t;
    }
    if (st.t >= t_end - t_tol) {
      if (prog.positivity_violation_time) return finish(Verdict::Instability, "positivity");
      return finish(Verdict::GlobalLooking, "horizon");
    }

    double dt_cap = params.dt_max;
    if (params.adaptive_dt) {
      const double dc = cfl_dt(rhs, st, params);
      if (dc < params.dt_min) {
        take_record();
        return finish(Verdict::BlowUp, "dt-collapse");
      }
      dt_cap = std::min(dt_cap, dc);
    }
    // Land exactly on the next record time (or the horizon) with equal steps.
    const double target = std::min(prog.next_record, t_end) - st.t;
    const double steps = std::max(1.0, std::ceil(target / dt_cap - 1e-9));
    const double dt = target / steps;

    try {
      st = step(st, rhs, dt, params);
    } catch (const IntegrationError& e) {
      take_record();
      return finish(Verdict::Instability, e.what());
    }
    last_dt = dt;
  }
}

}  // namespace couette
