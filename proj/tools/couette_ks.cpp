// couette_ks: command-line front end.
//
//   couette_ks simulate  --config FILE [--out DIR] [--strict] [--resume CKPT] [--verbose]
//   couette_ks sweep     --config FILE [--out DIR] [--parallel N] [--A LIST] [--M LIST]
//                        [--timeout SEC] [--memory-cap MB]
//   couette_ks verify    [--out FILE] [--tol-scale X] [--mass M]
//   couette_ks rate-scan [--config FILE] [--out DIR] [--parallel N] [--mode linear|nonlinear|synthetic]
//                        [--A LIST]
//
// Exit codes: 0 success, 1 runtime failure (or failed oracle), 2 usage or
// configuration error, 3 blow-up verdict under --strict.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "couette_ks/config.hpp"
#include "couette_ks/harness.hpp"
#include "couette_ks/verify.hpp"

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw CLI::ValidationError("list", "bad number: " + item);
    out.push_back(v);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-spectral chemotaxis-fluid simulator near Couette flow"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  bool strict = false;
  bool verbose = false;
  std::string resume_path;
  auto* sim = app.add_subcommand("simulate", "Run one configuration");
  sim->add_option("--config", config_path, "Run configuration (JSON)")->required();
  sim->add_option("--out", out_dir, "Output directory (overrides output.dir)");
  sim->add_flag("--strict", strict, "Exit with status 3 on a blow-up verdict");
  sim->add_option("--resume", resume_path, "Continue from a checkpoint written by simulate");
  sim->add_flag("--verbose", verbose, "Print each diagnostics record to stderr");

  int parallel = 1;
  std::string A_list = "1,10,100,1000,10000,100000";
  std::string M_list = "1.0,2.0,3.0,3.5,3.6276,4.0,6.0";
  double timeout_s = 0.0;
  double memory_cap = 0.0;
  auto* sweep = app.add_subcommand("sweep", "Verdict table over an (A, M) grid");
  sweep->add_option("--config", config_path, "Base configuration (JSON)")->required();
  sweep->add_option("--out", out_dir, "Output directory (overrides output.dir)");
  sweep->add_option("--parallel", parallel, "Concurrent points (capped by COUETTE_KS_THREADS)");
  sweep->add_option("--A", A_list, "Comma-separated shear amplitudes");
  sweep->add_option("--M", M_list, "Comma-separated masses");
  sweep->add_option("--timeout", timeout_s, "Per-point wall-clock limit in seconds (0 = none)");
  sweep->add_option("--memory-cap", memory_cap, "Per-point memory estimate cap in MB (0 = none)");

  std::string verify_out;
  double tol_scale = 1.0;
  double verify_mass = 3.0;
  auto* verify = app.add_subcommand("verify", "Run the built-in oracle suite");
  verify->add_option("--out", verify_out, "Also write the JSON report to this file");
  verify->add_option("--tol-scale", tol_scale, "Multiply every oracle tolerance");
  verify->add_option("--mass", verify_mass, "Mass for the threshold report");

  std::string mode = "linear";
  std::string rate_A = "1000,10000,100000";
  auto* rate = app.add_subcommand("rate-scan", "Enhanced-dissipation rate scan over A");
  rate->add_option("--config", config_path, "Base configuration (required for nonlinear mode)");
  rate->add_option("--out", out_dir, "Output directory");
  rate->add_option("--parallel", parallel, "Concurrent runs (capped by COUETTE_KS_THREADS)");
  rate->add_option("--mode", mode, "linear | nonlinear | synthetic")
      ->check(CLI::IsMember({"linear", "nonlinear", "synthetic"}));
  rate->add_option("--A", rate_A, "Comma-separated shear amplitudes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      const couette::RunConfig cfg = couette::load_config(config_path);
      couette::SimulateOptions so;
      so.out_dir = out_dir;
      so.strict = strict;
      so.quiet = !verbose;
      if (!resume_path.empty()) so.resume = resume_path;
      const couette::SimulateResult r = couette::simulate(cfg, so);
      std::printf("verdict=%s trigger=%s t_exit=%.6g records=%zu manifest=%s\n",
                  couette::to_string(r.run.verdict).c_str(), r.run.trigger.c_str(), r.run.t_exit,
                  r.run.records.size(), r.manifest_path.c_str());
      return r.exit_code;
    }
    if (*sweep) {
      const couette::RunConfig cfg = couette::load_config(config_path);
      couette::SweepOptions so;
      so.A_values = parse_list(A_list);
      so.M_values = parse_list(M_list);
      so.parallel = parallel;
      so.timeout_s = timeout_s;
      so.memory_cap_mb = memory_cap;
      const auto rows = couette::run_sweep(cfg, so);
      const std::filesystem::path dir = out_dir.empty() ? cfg.output.dir : out_dir;
      std::filesystem::create_directories(dir);
      const std::string csv = couette::sweep_csv(rows);
      write_text(dir / "sweep.csv", csv);
      std::cout << csv;
      for (const auto& [lo, hi] : couette::monotonicity_violations(rows)) {
        std::fprintf(stderr,
                     "review: M=%g looks global at A=%g but blows up at larger A=%g\n", lo->M,
                     lo->A, hi->A);
      }
      return 0;
    }
    if (*verify) {
      couette::VerifyOptions vo;
      vo.tolerance_scale = tol_scale;
      vo.mass = verify_mass;
      const couette::VerifyReport rep = couette::run_verify(vo);
      const std::string text = rep.to_json().dump(2) + "\n";
      std::cout << text;
      if (!verify_out.empty()) write_text(verify_out, text);
      return rep.all_passed() ? 0 : 1;
    }
    if (*rate) {
      couette::RunConfig cfg;
      if (!config_path.empty()) {
        cfg = couette::load_config(config_path);
      } else if (mode == "nonlinear") {
        throw CLI::ValidationError("--config", "required for nonlinear mode");
      }
      couette::RateScanOptions ro;
      ro.mode = mode == "linear"      ? couette::RateScanMode::Linear
                : mode == "nonlinear" ? couette::RateScanMode::Nonlinear
                                      : couette::RateScanMode::Synthetic;
      ro.A_values = parse_list(rate_A);
      ro.parallel = parallel;
      const auto res = couette::run_rate_scan(cfg, ro);
      const std::string json = couette::rate_scan_json(res).dump(2) + "\n";
      std::cout << json;
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_text(std::filesystem::path(out_dir) / "rates.csv", couette::rate_scan_csv(res));
        write_text(std::filesystem::path(out_dir) / "exponent.json", json);
      }
      return 0;
    }
  } catch (const couette::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
