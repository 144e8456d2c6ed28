#include "couette_ks/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace couette {

namespace {

using json = nlohmann::json;

// Best-effort line lookup: follows the pointer's keys through the raw text.
int line_of(const std::string& text, const std::string& pointer) {
  std::size_t pos = 0;
  std::stringstream ss(pointer);
  std::string token;
  while (std::getline(ss, token, '/')) {
    if (token.empty()) continue;
    const std::size_t found = text.find("\"" + token + "\"", pos);
    if (found == std::string::npos) break;
    pos = found;
  }
  int line = 1;
  for (std::size_t k = 0; k < pos && k < text.size(); ++k) {
    if (text[k] == '\n') ++line;
  }
  return line;
}

class Reader {
 public:
  Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& pointer, const std::string& why) const {
    throw ConfigError(source_ + ":" + std::to_string(line_of(text_, pointer)) + ": " + pointer +
                      ": " + why);
  }

  void check_keys(const json& obj, const std::string& pointer,
                  const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail(pointer, "expected an object");
    for (const auto& [key, value] : obj.items()) {
      if (!allowed.count(key)) fail(pointer + "/" + key, "unknown key");
    }
  }

  template <typename T>
  void read(const json& obj, const std::string& pointer, const char* key, T& out) const {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    const std::string p = pointer + "/" + key;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(p, "expected true/false");
      out = v.get<bool>();
    } else if constexpr (std::is_same_v<T, int>) {
      if (!v.is_number_integer()) fail(p, "expected an integer");
      out = v.get<int>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) fail(p, "expected a number");
      out = v.get<double>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(p, "expected a string");
      out = v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::optional<double>>) {
      if (v.is_null()) {
        out.reset();
      } else {
        if (!v.is_number()) fail(p, "expected a number or null");
        out = v.get<double>();
      }
    }
  }

 private:
  const std::string& text_;
  std::string source_;
};

std::string omega_kind_name(OmegaInit::Kind k) { return k == OmegaInit::Kind::Zero ? "zero" : "mode"; }

}  // namespace

PhysParams RunConfig::phys_params() const {
  PhysParams p;
  p.grid = Grid::make(grid.nx, grid.ny, grid.ly);
  p.A = physics.A;
  p.t_end = physics.t_end;
  p.dt_max = physics.dt_max;
  p.dt_min = physics.dt_min;
  p.cfl = physics.cfl;
  p.adaptive_dt = physics.adaptive_dt;
  p.remap_period = physics.remap_period;
  p.blowup_factor = diagnostics.blowup_factor;
  p.leak_tol = diagnostics.leak_tol;
  p.positivity_tol = diagnostics.positivity_tol;
  p.couplings = physics.couplings;
  return p;
}

RunOptions RunConfig::run_options() const {
  RunOptions o;
  o.record_interval = diagnostics.interval;
  o.xa_exponent = physics.a;
  if (diagnostics.K_neq && diagnostics.K_inf) {
    o.bootstrap = BootstrapConstants{*diagnostics.K_neq, *diagnostics.K_inf, physics.a, false};
  }
  return o;
}

nlohmann::ordered_json RunConfig::numerics_json() const {
  nlohmann::ordered_json j;
  j["schema"] = kConfigSchema;
  j["grid"] = {{"nx", grid.nx}, {"ny", grid.ny}, {"ly", grid.ly}};
  j["physics"] = {{"A", physics.A},
                  {"a", physics.a},
                  {"t_end", physics.t_end},
                  {"dt_max", physics.dt_max},
                  {"dt_min", physics.dt_min},
                  {"cfl", physics.cfl},
                  {"adaptive_dt", physics.adaptive_dt},
                  {"remap_period", physics.remap_period},
                  {"couplings",
                   {{"advection", physics.couplings.advection},
                    {"chemotaxis", physics.couplings.chemotaxis},
                    {"buoyancy", physics.couplings.buoyancy},
                    {"vorticity_advection", physics.couplings.vorticity_advection}}}};
  nlohmann::ordered_json init;
  init["kind"] = initial.kind == InitialData::Kind::GaussianBlob ? "gaussian-blob" : "file";
  init["mass"] = initial.mass;
  init["x0"] = initial.x0;
  init["y0"] = initial.y0;
  init["sigma"] = initial.sigma;
  if (initial.kind == InitialData::Kind::File) init["path"] = initial.path;
  init["omega"] = {{"kind", omega_kind_name(initial.omega.kind)},
                   {"amplitude", initial.omega.amplitude},
                   {"kx", initial.omega.kx},
                   {"sigma_y", initial.omega.sigma_y}};
  j["initial"] = init;
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  j["diagnostics"] = {{"interval", diagnostics.interval},
                      {"K_neq", opt(diagnostics.K_neq)},
                      {"K_inf", opt(diagnostics.K_inf)},
                      {"blowup_factor", diagnostics.blowup_factor},
                      {"leak_tol", diagnostics.leak_tol},
                      {"positivity_tol", diagnostics.positivity_tol}};
  return j;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j = numerics_json();
  j["output"] = {{"dir", output.dir}, {"checkpoint", output.checkpoint}};
  return j;
}

std::string RunConfig::numerics_hash() const {
  const std::string text = numerics_json().dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // byte offset -> line
    int line = 1;
    for (std::size_t k = 0; k < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') ++line;
    }
    throw ConfigError(source + ":" + std::to_string(line) + ": invalid JSON: " + e.what());
  }
  const Reader r(text, source);
  r.check_keys(root, "", {"schema", "grid", "physics", "initial", "diagnostics", "output"});
  if (!root.contains("schema")) r.fail("/schema", "missing schema field");
  if (!root["schema"].is_string() || root["schema"].get<std::string>() != kConfigSchema) {
    r.fail("/schema", std::string("unsupported schema (expected \"") + kConfigSchema + "\")");
  }

  RunConfig c;
  if (root.contains("grid")) {
    const json& g = root["grid"];
    r.check_keys(g, "/grid", {"nx", "ny", "ly"});
    r.read(g, "/grid", "nx", c.grid.nx);
    r.read(g, "/grid", "ny", c.grid.ny);
    r.read(g, "/grid", "ly", c.grid.ly);
  }
  if (c.grid.nx < 8 || c.grid.nx % 2 != 0) r.fail("/grid/nx", "must be even and >= 8");
  if (c.grid.ny < 8 || c.grid.ny % 2 != 0) r.fail("/grid/ny", "must be even and >= 8");
  if (!(c.grid.ly > 0.0)) r.fail("/grid/ly", "must be positive");

  if (root.contains("physics")) {
    const json& p = root["physics"];
    r.check_keys(p, "/physics", {"A", "a", "t_end", "dt_max", "dt_min", "cfl", "adaptive_dt",
                                 "remap_period", "couplings"});
    r.read(p, "/physics", "A", c.physics.A);
    r.read(p, "/physics", "a", c.physics.a);
    r.read(p, "/physics", "t_end", c.physics.t_end);
    r.read(p, "/physics", "dt_max", c.physics.dt_max);
    r.read(p, "/physics", "dt_min", c.physics.dt_min);
    r.read(p, "/physics", "cfl", c.physics.cfl);
    r.read(p, "/physics", "adaptive_dt", c.physics.adaptive_dt);
    r.read(p, "/physics", "remap_period", c.physics.remap_period);
    if (p.contains("couplings")) {
      const json& cp = p["couplings"];
      const std::string ptr = "/physics/couplings";
      r.check_keys(cp, ptr, {"advection", "chemotaxis", "buoyancy", "vorticity_advection"});
      r.read(cp, ptr, "advection", c.physics.couplings.advection);
      r.read(cp, ptr, "chemotaxis", c.physics.couplings.chemotaxis);
      r.read(cp, ptr, "buoyancy", c.physics.couplings.buoyancy);
      r.read(cp, ptr, "vorticity_advection", c.physics.couplings.vorticity_advection);
    }
  }
  if (!(c.physics.A >= 1.0)) r.fail("/physics/A", "must be >= 1");
  if (!(c.physics.a >= 0.0 && c.physics.a <= 4.0)) r.fail("/physics/a", "must lie in [0, 4]");
  if (!(c.physics.t_end > 0.0)) r.fail("/physics/t_end", "must be positive");
  if (!(c.physics.dt_max > 0.0)) r.fail("/physics/dt_max", "must be positive");
  if (!(c.physics.dt_min > 0.0) || c.physics.dt_min > c.physics.dt_max) {
    r.fail("/physics/dt_min", "must be positive and <= dt_max");
  }
  if (!(c.physics.cfl > 0.0)) r.fail("/physics/cfl", "must be positive");
  if (c.physics.remap_period < 0) r.fail("/physics/remap_period", "must be >= 0 (0 disables)");

  if (root.contains("initial")) {
    const json& in = root["initial"];
    r.check_keys(in, "/initial", {"kind", "mass", "x0", "y0", "sigma", "path", "omega"});
    std::string kind = "gaussian-blob";
    r.read(in, "/initial", "kind", kind);
    if (kind == "gaussian-blob") {
      c.initial.kind = InitialData::Kind::GaussianBlob;
    } else if (kind == "file") {
      c.initial.kind = InitialData::Kind::File;
    } else {
      r.fail("/initial/kind", "must be \"gaussian-blob\" or \"file\"");
    }
    r.read(in, "/initial", "mass", c.initial.mass);
    r.read(in, "/initial", "x0", c.initial.x0);
    r.read(in, "/initial", "y0", c.initial.y0);
    r.read(in, "/initial", "sigma", c.initial.sigma);
    r.read(in, "/initial", "path", c.initial.path);
    if (in.contains("omega")) {
      const json& w = in["omega"];
      r.check_keys(w, "/initial/omega", {"kind", "amplitude", "kx", "sigma_y"});
      std::string wk = "zero";
      r.read(w, "/initial/omega", "kind", wk);
      if (wk == "zero") {
        c.initial.omega.kind = OmegaInit::Kind::Zero;
      } else if (wk == "mode") {
        c.initial.omega.kind = OmegaInit::Kind::Mode;
      } else {
        r.fail("/initial/omega/kind", "must be \"zero\" or \"mode\"");
      }
      r.read(w, "/initial/omega", "amplitude", c.initial.omega.amplitude);
      r.read(w, "/initial/omega", "kx", c.initial.omega.kx);
      r.read(w, "/initial/omega", "sigma_y", c.initial.omega.sigma_y);
    }
  }
  if (!(c.initial.mass >= 0.0)) r.fail("/initial/mass", "must be >= 0");
  if (!(c.initial.sigma > 0.0)) r.fail("/initial/sigma", "must be positive");
  if (c.initial.kind == InitialData::Kind::File && c.initial.path.empty()) {
    r.fail("/initial/path", "required for kind \"file\"");
  }
  if (c.initial.omega.kind == OmegaInit::Kind::Mode) {
    if (c.initial.omega.kx < 1) r.fail("/initial/omega/kx", "must be >= 1");
    if (!(c.initial.omega.sigma_y > 0.0)) r.fail("/initial/omega/sigma_y", "must be positive");
  }

  if (root.contains("diagnostics")) {
    const json& d = root["diagnostics"];
    r.check_keys(d, "/diagnostics", {"interval", "K_neq", "K_inf", "blowup_factor", "leak_tol",
                                     "positivity_tol"});
    r.read(d, "/diagnostics", "interval", c.diagnostics.interval);
    r.read(d, "/diagnostics", "K_neq", c.diagnostics.K_neq);
    r.read(d, "/diagnostics", "K_inf", c.diagnostics.K_inf);
    r.read(d, "/diagnostics", "blowup_factor", c.diagnostics.blowup_factor);
    r.read(d, "/diagnostics", "leak_tol", c.diagnostics.leak_tol);
    r.read(d, "/diagnostics", "positivity_tol", c.diagnostics.positivity_tol);
  }
  if (!(c.diagnostics.interval > 0.0)) r.fail("/diagnostics/interval", "must be positive");
  if (c.diagnostics.K_neq.has_value() != c.diagnostics.K_inf.has_value()) {
    r.fail("/diagnostics/K_neq", "K_neq and K_inf must be given together");
  }
  if (c.diagnostics.K_neq && !(*c.diagnostics.K_neq > 0.0)) {
    r.fail("/diagnostics/K_neq", "must be positive");
  }
  if (c.diagnostics.K_inf && !(*c.diagnostics.K_inf > 0.0)) {
    r.fail("/diagnostics/K_inf", "must be positive");
  }
  if (!(c.diagnostics.blowup_factor > 1.0)) r.fail("/diagnostics/blowup_factor", "must be > 1");
  if (!(c.diagnostics.leak_tol > 0.0)) r.fail("/diagnostics/leak_tol", "must be positive");
  if (!(c.diagnostics.positivity_tol >= 0.0)) {
    r.fail("/diagnostics/positivity_tol", "must be >= 0");
  }

  if (root.contains("output")) {
    const json& o = root["output"];
    r.check_keys(o, "/output", {"dir", "checkpoint"});
    r.read(o, "/output", "dir", c.output.dir);
    r.read(o, "/output", "checkpoint", c.output.checkpoint);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace couette
