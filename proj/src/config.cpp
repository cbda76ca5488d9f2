#include "muskat/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace muskat {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x))
    throw ConfigError(key, "expected a finite number, got '" + v + "'");
  return x;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
  Int x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

struct Entry {
  std::function<void(Config&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

#define NUM(KEY, FIELD) \
  {KEY, {[](Config& c, const std::string& v) { c.FIELD = to_double(KEY, v); }, \
         [](const Config& c) { return fmt(c.FIELD); }}}
#define INT(KEY, FIELD) \
  {KEY, {[](Config& c, const std::string& v) { c.FIELD = to_int<decltype(c.FIELD)>(KEY, v); }, \
         [](const Config& c) { return std::to_string(c.FIELD); }}}
#define BOOL(KEY, FIELD) \
  {KEY, {[](Config& c, const std::string& v) { c.FIELD = to_bool(KEY, v); }, \
         [](const Config& c) { return std::string(c.FIELD ? "true" : "false"); }}}
#define STR(KEY, FIELD) \
  {KEY, {[](Config& c, const std::string& v) { c.FIELD = v; }, [](const Config& c) { return c.FIELD; }}}

const std::map<std::string, Entry>& table() {
  static const std::map<std::string, Entry> t = {
      INT("grid.n", n),
      NUM("grid.L", L),
      NUM("fluid.mu1", run.step.fluid.mu1),
      NUM("fluid.mu2", run.step.fluid.mu2),
      NUM("fluid.rho1", run.step.fluid.rho1),
      NUM("fluid.rho2", run.step.fluid.rho2),
      {"time.dt_policy",
       {[](Config& c, const std::string& v) {
          if (v == "cfl") c.run.dt_policy = DtPolicy::cfl;
          else if (v == "fixed") c.run.dt_policy = DtPolicy::fixed;
          else throw ConfigError("time.dt_policy", "expected cfl or fixed, got '" + v + "'");
        },
        [](const Config& c) { return std::string(c.run.dt_policy == DtPolicy::cfl ? "cfl" : "fixed"); }}},
      NUM("time.dt", run.dt),
      NUM("time.cfl", run.cfl),
      NUM("time.stability", run.stability),
      NUM("time.t_end", run.t_end),
      INT("time.max_steps", run.max_steps),
      NUM("solver.tol", run.step.solver.tol),
      INT("solver.max_iter", run.step.solver.max_iter),
      INT("solver.restart", run.step.solver.restart),
      {"solver.method",
       {[](Config& c, const std::string& v) {
          using M = SolverConfig::Method;
          if (v == "auto") c.run.step.solver.method = M::automatic;
          else if (v == "gmres") c.run.step.solver.method = M::gmres;
          else if (v == "picard") c.run.step.solver.method = M::picard;
          else throw ConfigError("solver.method", "expected auto, gmres or picard, got '" + v + "'");
        },
        [](const Config& c) {
          using M = SolverConfig::Method;
          const M m = c.run.step.solver.method;
          return std::string(m == M::automatic ? "auto" : m == M::gmres ? "gmres" : "picard");
        }}},
      INT("quad.ring", run.step.quad.ring),
      NUM("quad.window", run.step.quad.window),
      NUM("quad.cutoff", run.step.quad.cutoff),
      INT("quad.angular_nodes", run.step.quad.angular_nodes),
      {"quad.far_field",
       {[](Config& c, const std::string& v) {
          if (v != "auto" && v != "box" && v != "periodic")
            throw ConfigError("quad.far_field", "expected auto, box or periodic, got '" + v + "'");
          c.far_field = v;
        },
        [](const Config& c) { return c.far_field; }}},
      BOOL("run.guarded", run.step.guarded),
      BOOL("run.deterministic", run.step.quad.deterministic),
      NUM("run.sigma_min", run.step.sigma_min),
      NUM("stop.gauge_max", run.gauge_max),
      NUM("stop.inv_n_max", run.inv_n_max),
      INT("diag.gauge_stride", run.step.gauge_stride),
      BOOL("diag.gauge_exact", run.step.gauge_exact),
      STR("init.kind", init.kind),
      INT("init.k1", init.k1),
      INT("init.k2", init.k2),
      NUM("init.eps", init.eps),
      NUM("init.amplitude", init.amplitude),
      NUM("init.width", init.width),
      NUM("init.cx", init.cx),
      NUM("init.cy", init.cy),
      INT("init.count", init.count),
      STR("init.path", init.path),
      BOOL("init.isothermalize", init.isothermalize),
      NUM("init.iso_tol", init.iso_tol),
      INT("init.iso_max_iter", init.iso_max_iter),
      INT("init.seed", init.seed),
      STR("output.dir", output_dir),
      INT("output.cadence", run.cadence),
  };
  return t;
}

#undef NUM
#undef INT
#undef BOOL
#undef STR

}  // namespace

void validate_config(const Config& c) {
  try {
    (void)c.grid();
  } catch (const InvalidInput& e) {
    throw ConfigError(c.n < 8 || c.n % 2 ? "grid.n" : "grid.L", e.what());
  }
  c.run.step.fluid.validate();
  const RunConfig& r = c.run;
  if (!(r.dt > 0)) throw ConfigError("time.dt", "must be positive");
  if (!(r.cfl > 0)) throw ConfigError("time.cfl", "must be positive");
  if (!(r.stability > 0)) throw ConfigError("time.stability", "must be positive");
  if (!(r.t_end >= 0)) throw ConfigError("time.t_end", "must be non-negative");
  if (r.max_steps < 0) throw ConfigError("time.max_steps", "must be non-negative");
  if (!(r.step.solver.tol > 0)) throw ConfigError("solver.tol", "must be positive");
  if (r.step.solver.max_iter < 1) throw ConfigError("solver.max_iter", "must be >= 1");
  if (r.step.solver.restart < 1) throw ConfigError("solver.restart", "must be >= 1");
  r.step.quad.validate(c.grid());
  if (!(r.step.sigma_min > 0)) throw ConfigError("run.sigma_min", "must be positive");
  if (!(r.gauge_max > 0)) throw ConfigError("stop.gauge_max", "must be positive");
  if (!(r.inv_n_max > 0)) throw ConfigError("stop.inv_n_max", "must be positive");
  if (r.step.gauge_stride < 1) throw ConfigError("diag.gauge_stride", "must be >= 1");
  if (r.cadence < 1) throw ConfigError("output.cadence", "must be >= 1");
  c.init.validate();
}

RunConfig effective_run_config(const Config& c) {
  RunConfig r = c.run;
  const bool periodic = c.far_field == "periodic" || (c.far_field == "auto" && c.init.kind == "cosine");
  r.step.quad.far_field = periodic ? QuadratureConfig::FarField::periodic : QuadratureConfig::FarField::box;
  return r;
}

void InitialDataSpec::validate() const {
  static const std::set<std::string> kinds = {"flat", "cosine", "gaussian", "random-bump", "file"};
  if (!kinds.count(kind)) throw ConfigError("init.kind", "unknown kind '" + kind + "'");
  if (!(eps >= 0)) throw ConfigError("init.eps", "must be non-negative");
  if (!(amplitude >= 0)) throw ConfigError("init.amplitude", "must be non-negative");
  if (!(width > 0)) throw ConfigError("init.width", "must be positive");
  if (count < 1) throw ConfigError("init.count", "must be >= 1");
  if (kind == "file" && path.empty()) throw ConfigError("init.path", "required for init.kind = file");
  if (!(iso_tol > 0)) throw ConfigError("init.iso_tol", "must be positive");
  if (iso_max_iter < 0) throw ConfigError("init.iso_max_iter", "must be non-negative");
}

void set_config_value(Config& c, const std::string& key, const std::string& value) {
  const auto it = table().find(key);
  if (it == table().end()) throw ConfigError(key, "unknown key");
  it->second.set(c, value);
}

Config parse_config(const std::string& text) {
  Config c;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line, "line " + std::to_string(lineno) + " is not of the form key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(key, "given more than once");
    set_config_value(c, key, value);
  }
  validate_config(c);
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("io", "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const Config& c) {
  std::string out;
  for (const auto& [key, e] : table()) out += key + " = " + e.get(c) + "\n";
  return out;
}

}  // namespace muskat
