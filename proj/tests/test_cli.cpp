#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unistd.h>

#include "muskat/initial_data.hpp"
#include "muskat/snapshot.hpp"

using namespace muskat;
namespace fs = std::filesystem;

namespace {

std::string config_error_key(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("muskat3d_cli_" + std::to_string(getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct Outcome {
  int code;
  std::string out, err;
};

Outcome cli(const TempDir& dir, const std::string& args) {
  const fs::path out = dir.path / "stdout.txt", err = dir.path / "stderr.txt";
  const std::string cmd = std::string(MUSKAT3D_BIN) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

fs::path write_config(const TempDir& dir, const std::string& body) {
  const fs::path p = dir.path / "run.cfg";
  std::ofstream(p) << body << "output.dir = " << (dir.path / "out").string() << "\n";
  return p;
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
  std::ifstream f(p);
  std::string line;
  std::getline(f, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("config errors name the offending key") {
  CHECK(config_error_key("grid.n = 32\nfoo.bar = 1\n") == "foo.bar");
  CHECK(config_error_key("grid.n = 32\ngrid.n = 64\n") == "grid.n");
  CHECK(config_error_key("fluid.mu1 = abc\n") == "fluid.mu1");
  CHECK(config_error_key("grid.n = 33\n") == "grid.n");
  CHECK(config_error_key("time.dt_policy = adaptive\n") == "time.dt_policy");
  CHECK(config_error_key("fluid.mu1 = -1\n").rfind("fluid.", 0) == 0);
  CHECK(config_error_key("# comment only\n\n") == "");
}

TEST_CASE("config format/parse round trip") {
  Config c = parse_config(
      "grid.n = 32\ngrid.L = 5.5\nfluid.rho2 = 0.1 # light\ntime.cfl = 0.3333333333333333\ninit.kind = cosine\n");
  CHECK(c.n == 32);
  CHECK(c.L == 5.5);
  const std::string text = format_config(c);
  const Config d = parse_config(text);
  CHECK(format_config(d) == text);
  CHECK(d.run.cfl == c.run.cfl);
  CHECK(d.run.step.fluid.rho2 == 0.1);

  CHECK(effective_run_config(c).step.quad.far_field == QuadratureConfig::FarField::periodic);
  c.init.kind = "gaussian";
  CHECK(effective_run_config(c).step.quad.far_field == QuadratureConfig::FarField::box);
  c.far_field = "periodic";
  CHECK(effective_run_config(c).step.quad.far_field == QuadratureConfig::FarField::periodic);
}

TEST_CASE("initial data") {
  const ParamGrid g(32, 6.0);
  InitialDataSpec s;
  s.kind = "cosine";
  s.eps = 0.5;  // large cosine data is periodic and never margin-checked
  CHECK_NOTHROW(make_initial_data(s, g));

  s.kind = "random-bump";
  s.seed = 7;
  const InitialData a = make_initial_data(s, g), b = make_initial_data(s, g);
  CHECK(a.state.U[2].v == b.state.U[2].v);
  s.seed = 8;
  CHECK(make_initial_data(s, g).state.U[2].v != a.state.U[2].v);

  s.kind = "gaussian";
  s.width = 3.0;
  CHECK_THROWS_AS(make_initial_data(s, g), InvalidInput);
}

TEST_CASE("run: flat configuration") {
  TempDir dir;
  const auto cfg = write_config(dir, "grid.n = 16\ninit.kind = flat\ntime.t_end = 0.2\n");
  const Outcome o = cli(dir, "run " + cfg.string());
  CHECK(o.code == 0);
  CHECK(o.out.find("stop: t_end") != std::string::npos);
  const auto rows = read_csv(dir.path / "out" / "timeseries.csv");
  REQUIRE(rows.size() >= 2);
  for (const auto& r : rows) {
    REQUIRE(r.size() == 13);
    CHECK(r[12] <= 1e-12);
    CHECK(r[1] == 2);
  }
  const Config eff = load_config((dir.path / "out" / "config.effective").string());
  CHECK(eff.n == 16);
}

TEST_CASE("run: stable cosine mode decays monotonically") {
  TempDir dir;
  const auto cfg = write_config(dir, "grid.n = 16\ninit.kind = cosine\ntime.t_end = 1.0\n");
  const Outcome o = cli(dir, "run " + cfg.string());
  CHECK(o.code == 0);
  const auto s = nlohmann::json::parse(slurp(dir.path / "out" / "summary.json"));
  CHECK(s["stop_reason"] == "t_end");
  CHECK(s["amplitude"]["nonincreasing"] == true);
  CHECK(s["amplitude"]["series"].size() >= 3);
}

TEST_CASE("run: guarded stop on the unstable orientation") {
  TempDir dir;
  const auto cfg = write_config(
      dir, "grid.n = 16\ninit.kind = cosine\ninit.eps = 0.01\nfluid.rho1 = 2\nfluid.rho2 = 0\nrun.sigma_min = 1\n");
  const Outcome o = cli(dir, "run " + cfg.string());
  CHECK(o.code == 2);
  CHECK(o.out.find("rayleigh-taylor") != std::string::npos);
  const auto s = nlohmann::json::parse(slurp(dir.path / "out" / "summary.json"));
  CHECK(s["stop_reason"] == "rayleigh-taylor");
}

TEST_CASE("run: bad config exits 1 naming the key") {
  TempDir dir;
  const auto cfg = write_config(dir, "grid.n = 15\n");
  const Outcome o = cli(dir, "run " + cfg.string());
  CHECK(o.code == 1);
  CHECK(o.err.find("grid.n") != std::string::npos);
  CHECK(cli(dir, "run " + (dir.path / "missing.cfg").string()).code == 1);
}

TEST_CASE("diagnose") {
  TempDir dir;
  const fs::path flat = dir.path / "flat.bin";
  save_snapshot(flat.string(), SurfaceState::flat(ParamGrid(16, 6.0)), 0.0);
  Outcome o = cli(dir, "diagnose " + flat.string());
  REQUIRE(o.code == 0);
  auto j = nlohmann::json::parse(o.out);
  CHECK(j["min_sigma"] == 2.0);
  CHECK(j["gauge"] == 1.0);
  CHECK(j["inv_n"] == 1.0);

  o = cli(dir, "diagnose " + flat.string() + " --params fluid.rho2=1");
  REQUIRE(o.code == 0);
  CHECK(nlohmann::json::parse(o.out)["min_sigma"] == 1.0);

  // A mid-run snapshot reproduces the in-run record.
  const auto cfg = write_config(dir, "grid.n = 16\ninit.amplitude = 0.2\ntime.dt_policy = fixed\ntime.dt = 0.1\n"
                                     "time.t_end = 0.3\n");
  REQUIRE(cli(dir, "run " + cfg.string()).code == 0);
  const auto rows = read_csv(dir.path / "out" / "timeseries.csv");
  REQUIRE(rows.size() == 4);
  o = cli(dir, "diagnose " + (dir.path / "out" / "snap_000002.bin").string());
  REQUIRE(o.code == 0);
  j = nlohmann::json::parse(o.out);
  const auto& r = rows[2];
  CHECK(j["t"].get<double>() == r[0]);
  CHECK(std::abs(j["min_sigma"].get<double>() - r[1]) <= 1e-12);
  CHECK(std::abs(j["gauge"].get<double>() - r[2]) <= 1e-12);
  CHECK(std::abs(j["energy"].get<double>() - r[9]) <= 1e-12);
  CHECK(std::abs(j["max_xt"].get<double>() - r[12]) <= 1e-12);

  const std::string bytes = slurp(flat);
  const fs::path cut = dir.path / "cut.bin";
  std::ofstream(cut, std::ios::binary) << bytes.substr(0, bytes.size() / 2);
  o = cli(dir, "diagnose " + cut.string());
  CHECK(o.code != 0);
  CHECK(o.err.find("error") != std::string::npos);
}

TEST_CASE("usage errors") {
  TempDir dir;
  CHECK(cli(dir, "").code != 0);
  CHECK(cli(dir, "validate --level medium").code != 0);
}
