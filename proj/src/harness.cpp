#include "couette_ks/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "couette_ks/checkpoint.hpp"
#include "couette_ks/inequalities.hpp"

namespace couette {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Hash of everything except the horizon, so a run can be extended by resuming.
std::string resume_key(const RunConfig& config) {
  RunConfig c = config;
  c.physics.t_end = 0.0;
  return c.numerics_hash();
}

std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

// Runs `job(i)` for i in [0, count) on `threads` workers pulling from a
// shared counter. Each job owns its output slot.
template <typename Job>
void parallel_for(std::size_t count, int threads, bool reverse, Job&& job) {
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= count) return;
      job(reverse ? count - 1 - k : k);
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

}  // namespace

json progress_to_json(const RunProgress& p) {
  return {{"n_in_linf", p.n_in_linf},
          {"next_record", p.next_record},
          {"max_n_linf", p.max_n_linf},
          {"positivity_violation_time", optional_json(p.positivity_violation_time)},
          {"xa_n", p.xa_n.to_json()},
          {"xa_omega", p.xa_omega.to_json()},
          {"bootstrap", p.bootstrap.to_json()},
          {"constants",
           {{"K_neq", p.constants.K_neq},
            {"K_inf", p.constants.K_inf},
            {"a", p.constants.a},
            {"heuristic", p.constants.heuristic}}}};
}

RunProgress progress_from_json(const json& j) {
  RunProgress p;
  p.n_in_linf = j.at("n_in_linf").get<double>();
  p.next_record = j.at("next_record").get<double>();
  p.max_n_linf = j.at("max_n_linf").get<double>();
  if (!j.at("positivity_violation_time").is_null()) {
    p.positivity_violation_time = j["positivity_violation_time"].get<double>();
  }
  p.xa_n = XaAccumulator::from_json(j.at("xa_n"));
  p.xa_omega = XaAccumulator::from_json(j.at("xa_omega"));
  p.bootstrap = BootstrapMonitor::from_json(j.at("bootstrap"));
  const json& c = j.at("constants");
  p.constants = BootstrapConstants{c.at("K_neq").get<double>(), c.at("K_inf").get<double>(),
                                   c.at("a").get<double>(), c.at("heuristic").get<bool>()};
  return p;
}

//------------------------------------------------------------------------------
// simulate

ojson make_manifest(const RunConfig& config, const RunResult& result,
                    std::optional<std::string> resumed_from) {
  ojson m;
  m["schema"] = kConfigSchema;
  m["code_version"] = kCodeVersion;
  m["config_hash"] = config.numerics_hash();
  m["config"] = config.to_json();
  m["resumed_from"] = resumed_from ? ojson(*resumed_from) : ojson(nullptr);
  m["verdict"] = to_string(result.verdict);
  m["trigger"] = result.trigger;
  m["t_exit"] = result.t_exit;
  m["records"] = result.records.size();
  m["n_in_linf"] = result.progress.n_in_linf;
  m["max_n_linf"] = result.progress.max_n_linf;
  m["positivity_violation_time"] =
      result.progress.positivity_violation_time
          ? ojson(*result.progress.positivity_violation_time)
          : ojson(nullptr);
  const auto& b = result.progress.bootstrap;
  m["bootstrap"] = {
      {"K_neq", result.progress.constants.K_neq},
      {"K_inf", result.progress.constants.K_inf},
      {"constants_heuristic", result.progress.constants.heuristic},
      {"first_E_violation",
       b.first_E_violation() ? ojson(*b.first_E_violation()) : ojson(nullptr)},
      {"first_Linf_violation",
       b.first_Linf_violation() ? ojson(*b.first_Linf_violation()) : ojson(nullptr)}};
  m["threshold"] = ojson::parse(threshold_report(config.initial.mass).to_json());
  m["note"] =
      "global-looking means no exit trigger fired before the finite horizon; it is not a "
      "proof of global existence";
  return m;
}

SimulateResult simulate(const RunConfig& config, const SimulateOptions& options) {
  const fs::path out = options.out_dir.empty() ? fs::path(config.output.dir) : fs::path(options.out_dir);
  fs::create_directories(out);

  const PhysParams params = config.phys_params();
  const RunOptions ropts = config.run_options();

  SimulateResult sr;
  sr.csv_path = (out / "diag.csv").string();
  sr.checkpoint_path = (out / "final.cks").string();
  sr.manifest_path = (out / "manifest.json").string();

  SimState start;
  std::optional<RunProgress> progress;
  if (options.resume) {
    const Checkpoint ck = read_checkpoint(*options.resume);
    std::ifstream side(*options.resume + ".json");
    if (!side) throw std::runtime_error("resume: missing progress file " + *options.resume + ".json");
    const json sj = json::parse(side);
    if (sj.at("resume_key").get<std::string>() != resume_key(config)) {
      throw std::runtime_error(
          "resume: configuration differs from the checkpointed run (only physics.t_end may "
          "change)");
    }
    if (!ck.n.grid().same_shape(params.grid)) {
      throw std::runtime_error("resume: checkpoint grid differs from configured grid");
    }
    start = SimState{ck.t, ck.shear, ck.n, ck.omega};
    progress = progress_from_json(sj.at("progress"));
  } else {
    start = make_initial(config.initial, params.grid);
  }

  // Stream rows as they are produced; a resumed run appends.
  const bool append = options.resume && fs::exists(sr.csv_path);
  std::ofstream csv(sr.csv_path, append ? std::ios::app : std::ios::trunc);
  if (!csv) throw std::runtime_error("cannot write " + sr.csv_path);
  if (!append) csv << diag_csv_header() << '\n';

  RunCallbacks cb;
  cb.on_record = [&](const DiagRecord& r, const SimState&) {
    csv << diag_csv_row(r) << '\n';
    if (!options.quiet) {
      std::fprintf(stderr, "t=%9.4f  mass=%.12f  n_linf=%.4e  E=%.4e  leak=%.1e\n", r.t, r.mass,
                   r.n_linf, r.E_t, r.boundary_leak);
    }
    return true;
  };

  sr.run = progress ? resume(params, start, *progress, ropts, cb) : run(params, start, ropts, cb);
  csv.flush();

  if (config.output.checkpoint) {
    const SimState& f = sr.run.final_state;
    write_checkpoint(sr.checkpoint_path, Checkpoint{f.t, f.shear, params.A, f.n, f.omega});
    ojson side;
    side["resume_key"] = resume_key(config);
    side["progress"] = progress_to_json(sr.run.progress);
    std::ofstream(sr.checkpoint_path + ".json") << side.dump(2) << '\n';
  } else {
    sr.checkpoint_path.clear();
  }

  std::ofstream(sr.manifest_path) << make_manifest(config, sr.run, options.resume).dump(2) << '\n';
  sr.exit_code = (options.strict && sr.run.verdict == Verdict::BlowUp) ? 3 : 0;
  return sr;
}

//------------------------------------------------------------------------------
// sweep

int effective_threads(int requested) {
  int n = std::max(1, requested);
  if (const char* env = std::getenv("COUETTE_KS_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min<long>(n, cap);
  }
  return n;
}

namespace {

double safe_rate(const std::vector<double>& t, const std::vector<double>& v) {
  try {
    return fit_decay_rate_auto(t, v).lambda;
  } catch (const std::exception&) {
    return kNaN;
  }
}

SweepOutcome sweep_point(const RunConfig& base, double A, double M, const SweepOptions& o) {
  SweepOutcome out;
  out.A = A;
  out.M = M;
  RunConfig cfg = base;
  cfg.physics.A = A;
  cfg.initial.mass = M;
  try {
    const PhysParams params = cfg.phys_params();
    // Rough footprint: ~40 complex arrays of the grid size live at once.
    const double mb = 40.0 * 16.0 * static_cast<double>(params.grid.size()) / (1024.0 * 1024.0);
    if (o.memory_cap_mb > 0.0 && mb > o.memory_cap_mb) {
      out.trigger = "memory-cap";
      return out;
    }
    const auto t0 = std::chrono::steady_clock::now();
    RunCallbacks cb;
    if (o.timeout_s > 0.0) {
      cb.on_record = [&](const DiagRecord&, const SimState&) {
        const std::chrono::duration<double> el = std::chrono::steady_clock::now() - t0;
        return el.count() < o.timeout_s;
      };
    }
    const RunResult r = run(params, make_initial(cfg.initial, params.grid), cfg.run_options(), cb);
    out.verdict = r.verdict;
    out.trigger = r.trigger == "aborted" ? "timeout" : r.trigger;
    out.t_exit = r.t_exit;
    out.max_n_linf = r.progress.max_n_linf;
    std::vector<double> t, vn, vw;
    for (const auto& rec : r.records) {
      t.push_back(rec.t);
      vn.push_back(rec.nneq_l2);
      vw.push_back(rec.omeganeq_l2);
    }
    out.rate_n_neq = safe_rate(t, vn);
    out.rate_omega_neq = safe_rate(t, vw);
    out.E_final = r.records.empty() ? kNaN : r.records.back().E_t;
  } catch (const std::exception& e) {
    out.verdict = Verdict::Inconclusive;
    out.trigger = std::string("error: ") + e.what();
    out.rate_n_neq = out.rate_omega_neq = out.E_final = kNaN;
  }
  return out;
}

}  // namespace

std::vector<SweepOutcome> run_sweep(const RunConfig& base, const SweepOptions& options) {
  if (options.A_values.empty() || options.M_values.empty()) {
    throw std::invalid_argument("sweep: A and M lists must be non-empty");
  }
  for (double A : options.A_values) {
    if (!(A >= 1.0)) throw std::invalid_argument("sweep: every A must be >= 1");
  }
  for (double M : options.M_values) {
    if (!(M >= 0.0)) throw std::invalid_argument("sweep: every M must be >= 0");
  }
  std::vector<std::pair<double, double>> points;
  for (double M : options.M_values) {
    for (double A : options.A_values) points.emplace_back(A, M);
  }
  std::vector<SweepOutcome> rows(points.size());
  parallel_for(points.size(), effective_threads(options.parallel), options.reverse_order,
               [&](std::size_t k) { rows[k] = sweep_point(base, points[k].first, points[k].second, options); });
  std::sort(rows.begin(), rows.end(), [](const SweepOutcome& a, const SweepOutcome& b) {
    return a.M != b.M ? a.M < b.M : a.A < b.A;
  });
  return rows;
}

const std::string& sweep_csv_header() {
  static const std::string h = "A,M,verdict,t_exit,max_n_linf,rate_n_neq,rate_omega_neq,E_final";
  return h;
}

std::string sweep_csv(const std::vector<SweepOutcome>& rows) {
  std::ostringstream os;
  os << sweep_csv_header() << '\n';
  for (const auto& r : rows) {
    os << format_g(r.A) << ',' << format_g(r.M) << ',' << to_string(r.verdict) << ','
       << format_g(r.t_exit) << ',' << format_g(r.max_n_linf) << ',' << format_g(r.rate_n_neq)
       << ',' << format_g(r.rate_omega_neq) << ',' << format_g(r.E_final) << '\n';
  }
  return os.str();
}

std::vector<std::pair<const SweepOutcome*, const SweepOutcome*>> monotonicity_violations(
    const std::vector<SweepOutcome>& rows) {
  std::vector<std::pair<const SweepOutcome*, const SweepOutcome*>> out;
  for (const auto& lo : rows) {
    if (lo.verdict != Verdict::GlobalLooking) continue;
    for (const auto& hi : rows) {
      if (hi.M == lo.M && hi.A > lo.A && hi.verdict == Verdict::BlowUp) out.emplace_back(&lo, &hi);
    }
  }
  return out;
}

//------------------------------------------------------------------------------
// rate scan

double kernel_secant_rate(double A, double kx, double ky0, double t0, double t1) {
  if (!(t1 > t0)) throw std::invalid_argument("kernel_secant_rate: need t1 > t0");
  // int (ky0 - s kx)^2 ds = -(ky0 - s kx)^3 / (3 kx) for kx != 0
  const auto prim = [&](double s) {
    return kx != 0.0 ? -std::pow(ky0 - s * kx, 3) / (3.0 * kx) : ky0 * ky0 * s;
  };
  return (kx * kx + (prim(t1) - prim(t0)) / (t1 - t0)) / A;
}

namespace {

// log-amplitude of the exact kernel for (kx, ky0) at time t (up to a constant)
double kernel_log_amplitude(double A, double kx, double ky0, double t) {
  const double prim = kx != 0.0 ? (std::pow(ky0, 3) - std::pow(ky0 - t * kx, 3)) / (3.0 * kx)
                                : ky0 * ky0 * t;
  return -(kx * kx * t + prim) / A;
}

RateRow linear_point(const RunConfig& base, double A, const RateScanOptions& o) {
  const double td = std::cbrt(A);
  RunConfig cfg = base;
  cfg.grid = {o.linear_nx, o.linear_ny, o.linear_ly};
  cfg.physics.A = A;
  cfg.physics.t_end = 2.0 * td;
  cfg.physics.couplings = Couplings::none();
  cfg.physics.remap_period = o.linear_remap_period;
  cfg.physics.adaptive_dt = false;
  cfg.diagnostics.interval = td / 60.0;
  cfg.physics.dt_max = cfg.diagnostics.interval;
  cfg.physics.dt_min = std::min(cfg.physics.dt_min, cfg.physics.dt_max);
  // A y-uniform mode fills the whole lattice by construction; the
  // truncation-boundary exit does not apply to this exact linear problem.
  cfg.diagnostics.leak_tol = std::numeric_limits<double>::infinity();
  const PhysParams params = cfg.phys_params();
  const Grid& g = params.grid;

  SimState st{0.0, 0.0, SpectralField(g), SpectralField(g)};
  st.n = to_spectral(sample(g, [](double x, double) { return 1.5 + std::cos(x); }));
  st.omega = to_spectral(sample(g, [](double x, double) { return 0.5 * std::sin(x); }));
  RunOptions ro = cfg.run_options();
  ro.bootstrap = BootstrapConstants{1.0, 1.0, cfg.physics.a, true};
  const RunResult r = run(params, st, ro);

  RateRow row;
  row.A = A;
  row.t_lo = 0.5 * td;
  row.t_hi = 2.0 * td;
  std::vector<double> t, vn, vw, exact;
  for (const auto& rec : r.records) {
    t.push_back(rec.t);
    vn.push_back(rec.nneq_l2);
    vw.push_back(rec.omeganeq_l2);
    exact.push_back(std::exp(kernel_log_amplitude(A, 1.0, 0.0, rec.t)));
  }
  row.rate_n = fit_decay_rate(t, vn, row.t_lo, row.t_hi).lambda;
  row.rate_omega = fit_decay_rate(t, vw, row.t_lo, row.t_hi).lambda;
  // The oracle is the same least-squares fit applied to the exact kernel
  // sampled at the same times.
  row.exact_rate = fit_decay_rate(t, exact, row.t_lo, row.t_hi).lambda;
  return row;
}

RateRow nonlinear_point(const RunConfig& base, double A) {
  const double td = std::cbrt(A);
  RunConfig cfg = base;
  cfg.physics.A = A;
  cfg.physics.t_end = 2.0 * td;
  cfg.diagnostics.interval = std::min(cfg.diagnostics.interval, td / 60.0);
  const PhysParams params = cfg.phys_params();
  const RunResult r = run(params, make_initial(cfg.initial, params.grid), cfg.run_options());
  if (r.verdict != Verdict::GlobalLooking) {
    throw std::runtime_error("rate-scan: run at A=" + format_g(A) + " ended with " +
                             to_string(r.verdict) + " (" + r.trigger + ")");
  }
  RateRow row;
  row.A = A;
  row.t_lo = 0.5 * td;
  row.t_hi = 2.0 * td;
  row.exact_rate = kNaN;
  std::vector<double> t, vn, vw;
  for (const auto& rec : r.records) {
    t.push_back(rec.t);
    vn.push_back(rec.nneq_l2);
    vw.push_back(rec.omeganeq_l2);
  }
  row.rate_n = fit_decay_rate(t, vn, row.t_lo, row.t_hi).lambda;
  try {
    row.rate_omega = fit_decay_rate(t, vw, row.t_lo, row.t_hi).lambda;
  } catch (const std::exception&) {
    row.rate_omega = kNaN;
  }
  return row;
}

}  // namespace

RateScanResult run_rate_scan(const RunConfig& base, const RateScanOptions& options) {
  if (options.A_values.size() < 3) throw std::invalid_argument("rate-scan: need at least 3 A values");
  RateScanResult res;
  res.rows.resize(options.A_values.size());
  std::vector<std::string> errors(options.A_values.size());
  parallel_for(options.A_values.size(), effective_threads(options.parallel), false,
               [&](std::size_t k) {
                 const double A = options.A_values[k];
                 try {
                   switch (options.mode) {
                     case RateScanMode::Linear:
                       res.rows[k] = linear_point(base, A, options);
                       break;
                     case RateScanMode::Nonlinear:
                       res.rows[k] = nonlinear_point(base, A);
                       break;
                     case RateScanMode::Synthetic: {
                       const double lam = options.synthetic_c * std::pow(A, options.synthetic_exponent);
                       res.rows[k] = RateRow{A, lam, lam, lam, 0.5 * std::cbrt(A), 2.0 * std::cbrt(A)};
                       break;
                     }
                   }
                 } catch (const std::exception& e) {
                   errors[k] = e.what();
                 }
               });
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error(e);
  }
  std::sort(res.rows.begin(), res.rows.end(),
            [](const RateRow& a, const RateRow& b) { return a.A < b.A; });
  std::map<double, double> rn, rw;
  bool omega_ok = true;
  for (const auto& r : res.rows) {
    rn[r.A] = r.rate_n;
    if (std::isfinite(r.rate_omega) && r.rate_omega > 0.0) {
      rw[r.A] = r.rate_omega;
    } else {
      omega_ok = false;
    }
  }
  res.fit_n = enhanced_dissipation_exponent(rn);
  if (omega_ok) res.fit_omega = enhanced_dissipation_exponent(rw);
  return res;
}

std::string rate_scan_csv(const RateScanResult& result) {
  std::ostringstream os;
  os << "A,rate_n_neq,rate_omega_neq,exact_rate,t_lo,t_hi\n";
  for (const auto& r : result.rows) {
    os << format_g(r.A) << ',' << format_g(r.rate_n) << ',' << format_g(r.rate_omega) << ','
       << format_g(r.exact_rate) << ',' << format_g(r.t_lo) << ',' << format_g(r.t_hi) << '\n';
  }
  return os.str();
}

ojson rate_scan_json(const RateScanResult& result) {
  auto fit = [](const ExponentFit& f) {
    return ojson{{"slope", f.slope},
                 {"intercept", f.intercept},
                 {"stderr", f.stderr_slope},
                 {"band95", {f.band_lo, f.band_hi}}};
  };
  ojson j;
  j["expected_slope"] = -1.0 / 3.0;
  j["n_neq"] = fit(result.fit_n);
  j["omega_neq"] = result.fit_omega ? fit(*result.fit_omega) : ojson(nullptr);
  ojson rows = ojson::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"A", r.A},
                    {"rate_n_neq", r.rate_n},
                    {"rate_omega_neq", std::isfinite(r.rate_omega) ? ojson(r.rate_omega) : ojson(nullptr)},
                    {"exact_rate", std::isfinite(r.exact_rate) ? ojson(r.exact_rate) : ojson(nullptr)},
                    {"window", {r.t_lo, r.t_hi}}});
  }
  j["rows"] = rows;
  return j;
}

}  // namespace couette
