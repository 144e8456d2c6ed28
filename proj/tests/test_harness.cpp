// Configuration parsing and hashing, checkpoints, simulate/resume artifacts,
// sweeps, rate scans and the command-line front end.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "couette_ks/checkpoint.hpp"
#include "couette_ks/config.hpp"
#include "couette_ks/harness.hpp"
#include "support.hpp"

using namespace couette;
namespace fs = std::filesystem;

namespace {

const std::string kSmallConfig = R"({
  "schema": "couette-ks/1",
  "grid": { "nx": 48, "ny": 128, "ly": 6.283185307179586 },
  "physics": { "A": 100.0, "t_end": 0.2 },
  "initial": { "sigma": 0.6, "omega": { "kind": "mode", "amplitude": 0.3, "kx": 1, "sigma_y": 0.6 } },
  "diagnostics": { "interval": 0.05 },
  "output": { "dir": "unused" }
})";

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string body_of(const std::string& csv) { return csv.substr(csv.find('\n') + 1); }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(COUETTE_KS_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("default config file parses to the documented defaults") {
  const RunConfig c = load_config(std::string(COUETTE_KS_SOURCE_DIR) + "/configs/default.json");
  CHECK(c.grid.nx == 128);
  CHECK(c.grid.ny == 256);
  CHECK(c.physics.A == 1e5);
  CHECK(c.physics.t_end == 20.0);
  CHECK(c.initial.mass == 3.0);
  CHECK(c.initial.sigma == 0.5);
  CHECK(c.physics.remap_period == 0);
  CHECK_FALSE(c.diagnostics.K_neq.has_value());
  CHECK(c.numerics_hash() == RunConfig{}.numerics_hash());
}

TEST_CASE("validation errors carry the line and the JSON path") {
  const std::string text = "{\n  \"schema\": \"couette-ks/1\",\n  \"grid\": {\n    \"nx\": 7\n  }\n}";
  CHECK_THROWS_WITH_AS(parse_config(text, "cfg.json"), doctest::Contains("cfg.json:4: /grid/nx"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("{\"schema\": \"couette-ks/1\", \"physics\": {\"Amp\": 1}}"),
                       doctest::Contains("/physics/Amp: unknown key"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("{\"schema\": \"v0\"}"), doctest::Contains("/schema"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("{\n\"schema\": \n}", "x"), doctest::Contains("x:3"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"schema\": \"couette-ks/1\", \"physics\": {\"A\": 0.5}}"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"schema\": \"couette-ks/1\", \"initial\": {\"mass\": -1}}"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"schema\": \"couette-ks/1\", \"diagnostics\": {\"K_neq\": 1}}"),
                  ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("numerics hash covers every numerics field and ignores output") {
  const RunConfig base;
  const std::string h0 = base.numerics_hash();
  std::vector<RunConfig> variants(20, base);
  int k = 0;
  variants[k++].grid.nx = 64;
  variants[k++].grid.ny = 128;
  variants[k++].grid.ly = 5.0;
  variants[k++].physics.A = 1e4;
  variants[k++].physics.a = 1.0;
  variants[k++].physics.t_end = 10.0;
  variants[k++].physics.dt_max = 5e-3;
  variants[k++].physics.dt_min = 1e-9;
  variants[k++].physics.cfl = 0.4;
  variants[k++].physics.adaptive_dt = false;
  variants[k++].physics.remap_period = 2;
  variants[k++].physics.couplings.chemotaxis = false;
  variants[k++].initial.mass = 2.0;
  variants[k++].initial.sigma = 0.6;
  variants[k++].initial.omega.amplitude = 0.1;
  variants[k++].diagnostics.interval = 0.2;
  variants[k++].diagnostics.blowup_factor = 5.0;
  variants[k++].diagnostics.leak_tol = 1e-7;
  variants[k++].diagnostics.positivity_tol = 1e-5;
  variants[k].diagnostics.K_neq = 1.0;
  variants[k++].diagnostics.K_inf = 1.0;
  for (const auto& v : variants) CHECK(v.numerics_hash() != h0);
  RunConfig out = base;
  out.output.dir = "elsewhere";
  out.output.checkpoint = false;
  CHECK(out.numerics_hash() == h0);
}

TEST_CASE("checkpoint round trip is exact and rejects garbage") {
  const auto dir = test_support::scratch_dir("ckpt");
  const Grid g = Grid::make(16, 32, 2.0);
  Checkpoint ck{1.25, 0.5, 1e3, to_spectral(test_support::random_field(g, 1)),
                to_spectral(test_support::random_field(g, 2))};
  write_checkpoint((dir / "a.cks").string(), ck);
  const Checkpoint back = read_checkpoint((dir / "a.cks").string());
  CHECK(back.t == 1.25);
  CHECK(back.shear == 0.5);
  CHECK(back.A == 1e3);
  CHECK(test_support::max_abs_diff(back.n, ck.n) == 0.0);
  CHECK(test_support::max_abs_diff(back.omega, ck.omega) == 0.0);
  CHECK(fs::file_size(dir / "a.cks") == 4 + 8 + 5 * 8 + 2 * g.size() * 16);

  std::ofstream(dir / "bad.cks") << "NOPE";
  CHECK_THROWS_AS(read_checkpoint((dir / "bad.cks").string()), std::runtime_error);
  fs::resize_file(dir / "a.cks", 100);
  CHECK_THROWS_AS(read_checkpoint((dir / "a.cks").string()), std::runtime_error);
}

TEST_CASE("progress survives a JSON round trip") {
  RunProgress p;
  p.n_in_linf = 1.5;
  p.next_record = 0.3;
  p.max_n_linf = 2.0;
  p.positivity_violation_time = 0.1;
  p.constants = {2.0, 3.0, 0.5, true};
  const RunProgress q = progress_from_json(nlohmann::json::parse(progress_to_json(p).dump()));
  CHECK(q.n_in_linf == 1.5);
  CHECK(q.next_record == 0.3);
  CHECK(q.positivity_violation_time == 0.1);
  CHECK(q.constants.K_inf == 3.0);
  CHECK(q.constants.heuristic);
}

TEST_CASE("simulate writes CSV, checkpoint and manifest") {
  const auto dir = test_support::scratch_dir("simulate");
  const RunConfig c = parse_config(kSmallConfig);
  SimulateOptions so;
  so.out_dir = dir.string();
  const SimulateResult r = simulate(c, so);
  CHECK(r.exit_code == 0);
  const std::string csv = read_file(r.csv_path);
  CHECK(csv.substr(0, csv.find('\n')) == diag_csv_header());
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 5);
  const auto m = nlohmann::json::parse(read_file(r.manifest_path));
  CHECK(m.at("config_hash") == c.numerics_hash());
  CHECK(m.at("code_version") == kCodeVersion);
  CHECK(m.at("verdict") == "global-looking");
  CHECK(m.at("threshold").at("verdict") == "below");
  CHECK(fs::exists(r.checkpoint_path));
  CHECK(fs::exists(r.checkpoint_path + ".json"));

  // Same config again: bitwise-identical CSV.
  const auto dir2 = test_support::scratch_dir("simulate2");
  so.out_dir = dir2.string();
  CHECK(read_file(simulate(c, so).csv_path) == csv);
}

TEST_CASE("resume from a checkpoint reproduces the uninterrupted run") {
  RunConfig c = parse_config(kSmallConfig);
  const auto full_dir = test_support::scratch_dir("resume_full");
  const SimulateResult full = simulate(c, {full_dir.string(), std::nullopt, false, true});

  const auto part_dir = test_support::scratch_dir("resume_part");
  RunConfig half = c;
  half.physics.t_end = 0.1;
  const SimulateResult first = simulate(half, {part_dir.string(), std::nullopt, false, true});
  const SimulateResult second = simulate(c, {part_dir.string(), first.checkpoint_path, false, true});

  CHECK(test_support::max_abs_diff(second.run.final_state.n, full.run.final_state.n) <= 1e-10);
  CHECK(test_support::max_abs_diff(second.run.final_state.omega, full.run.final_state.omega) <= 1e-10);
  CHECK(body_of(read_file(second.csv_path)) == body_of(read_file(full.csv_path)));

  RunConfig other = c;
  other.physics.A = 50.0;
  CHECK_THROWS_AS(simulate(other, {test_support::scratch_dir("resume_bad").string(),
                                   first.checkpoint_path, false, true}),
                  std::runtime_error);
}

TEST_CASE("strict mode turns a blow-up into a nonzero exit code") {
  RunConfig c = parse_config(kSmallConfig);
  c.physics.A = 1.0;
  c.initial.mass = 6.0;
  c.diagnostics.blowup_factor = 1.0001;
  const auto dir = test_support::scratch_dir("strict");
  const SimulateResult lax = simulate(c, {dir.string(), std::nullopt, false, true});
  CHECK(lax.run.verdict == Verdict::BlowUp);
  CHECK(lax.exit_code == 0);
  const SimulateResult strict = simulate(c, {dir.string(), std::nullopt, true, true});
  CHECK(strict.exit_code == 3);
}

TEST_CASE("sweep: shape, sorting, agreement with simulate, order independence") {
  RunConfig c = parse_config(kSmallConfig);
  SweepOptions so;
  so.A_values = {100.0, 10.0};
  so.M_values = {3.0, 1.0};
  so.parallel = 2;
  const auto rows = run_sweep(c, so);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].M == 1.0);
  CHECK(rows[0].A == 10.0);
  CHECK(rows[3].M == 3.0);
  CHECK(rows[3].A == 100.0);

  so.reverse_order = true;
  so.parallel = 1;
  CHECK(sweep_csv(run_sweep(c, so)) == sweep_csv(rows));

  SweepOptions one;
  one.A_values = {100.0};
  one.M_values = {3.0};
  const auto single = run_sweep(c, one);
  const SimulateResult sim = simulate(c, {test_support::scratch_dir("sweep1").string(), std::nullopt, false, true});
  CHECK(single.at(0).verdict == sim.run.verdict);
  CHECK(single.at(0).t_exit == sim.run.t_exit);
  CHECK_THROWS_AS(run_sweep(c, SweepOptions{}), std::invalid_argument);
}

TEST_CASE("sweep points respect timeout and memory cap") {
  RunConfig c = parse_config(kSmallConfig);
  c.physics.t_end = 50.0;
  SweepOptions so;
  so.A_values = {100.0};
  so.M_values = {3.0};
  so.timeout_s = 1e-9;
  auto rows = run_sweep(c, so);
  CHECK(rows[0].verdict == Verdict::Inconclusive);
  so.timeout_s = 0.0;
  so.memory_cap_mb = 1e-3;
  rows = run_sweep(c, so);
  CHECK(rows[0].verdict == Verdict::Inconclusive);
}

TEST_CASE("thread cap from the environment") {
  setenv("COUETTE_KS_THREADS", "2", 1);
  CHECK(effective_threads(8) == 2);
  CHECK(effective_threads(1) == 1);
  setenv("COUETTE_KS_THREADS", "junk", 1);
  CHECK(effective_threads(3) == 3);
  unsetenv("COUETTE_KS_THREADS");
  CHECK(effective_threads(0) == 1);
}

TEST_CASE("monotonicity violations are flagged") {
  std::vector<SweepOutcome> rows(3);
  rows[0] = {1.0, 3.0, Verdict::GlobalLooking};
  rows[1] = {10.0, 3.0, Verdict::BlowUp};
  rows[2] = {10.0, 2.0, Verdict::BlowUp};
  const auto v = monotonicity_violations(rows);
  REQUIRE(v.size() == 1);
  CHECK(v[0].first->A == 1.0);
  CHECK(v[0].second->A == 10.0);
}

TEST_CASE("rate scan: synthetic slope and linear kernel agreement") {
  RateScanOptions o;
  o.mode = RateScanMode::Synthetic;
  const RateScanResult syn = run_rate_scan(RunConfig{}, o);
  CHECK(std::abs(syn.fit_n.slope + 1.0 / 3.0) < 1e-6);
  o.synthetic_exponent = -1.0;
  CHECK(std::abs(run_rate_scan(RunConfig{}, o).fit_n.slope + 1.0) < 1e-6);

  o.mode = RateScanMode::Linear;
  o.A_values = {1e3, 1e4, 1e5};
  const RateScanResult lin = run_rate_scan(RunConfig{}, o);
  for (const auto& r : lin.rows) {
    CHECK(std::abs(r.rate_n / r.exact_rate - 1.0) < 0.05);
    // The least-squares rate over the window is close to the kernel secant.
    CHECK(std::abs(r.rate_n / kernel_secant_rate(r.A, 1.0, 0.0, r.t_lo, r.t_hi) - 1.0) < 0.05);
  }
  CHECK(lin.fit_n.slope > -0.43);
  CHECK(lin.fit_n.slope < -0.23);
  o.A_values = {1e3, 1e4};
  CHECK_THROWS_AS(run_rate_scan(RunConfig{}, o), std::invalid_argument);
}

TEST_CASE("command line: usage errors, config errors and subcommands") {
  const auto dir = test_support::scratch_dir("cli");
  CHECK(run_cli("") == 2);
  CHECK(run_cli("simulate") == 2);  // missing --config
  CHECK(run_cli("simulate --config " + (dir / "missing.json").string()) == 2);
  std::ofstream(dir / "bad.json") << "{\"schema\": \"couette-ks/1\", \"grid\": {\"nx\": 3}}";
  CHECK(run_cli("simulate --config " + (dir / "bad.json").string()) == 2);

  std::ofstream(dir / "small.json") << kSmallConfig;
  CHECK(run_cli("simulate --config " + (dir / "small.json").string() + " --out " + (dir / "run").string()) == 0);
  CHECK(fs::exists(dir / "run" / "diag.csv"));
  CHECK(run_cli("simulate --config " + (dir / "small.json").string() + " --out " + (dir / "run2").string() +
                " --resume " + (dir / "run" / "final.cks").string()) == 0);

  CHECK(run_cli("sweep --config " + (dir / "small.json").string() + " --A 10,100 --M 1 --out " +
                (dir / "sweep").string()) == 0);
  CHECK(read_file(dir / "sweep" / "sweep.csv").rfind(sweep_csv_header(), 0) == 0);

  CHECK(run_cli("verify --out " + (dir / "verify.json").string()) == 0);
  const auto v = nlohmann::json::parse(read_file(dir / "verify.json"));
  CHECK(v.at("all_passed") == true);
  CHECK(v.at("threshold").at("M_crit").get<double>() == doctest::Approx(3.6276).epsilon(1e-4));
  CHECK(run_cli("verify --tol-scale 1e-300") == 1);  // tolerance override honored

  CHECK(run_cli("rate-scan --mode synthetic --out " + (dir / "rates").string()) == 0);
  CHECK(fs::exists(dir / "rates" / "rates.csv"));
  CHECK(run_cli("rate-scan --mode nonlinear") == 2);
  CHECK(run_cli("rate-scan --mode bogus") == 2);
}

}  // TEST_SUITE
