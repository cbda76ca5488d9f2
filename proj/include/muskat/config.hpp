#pragma once

#include <cstdint>
#include <string>

#include "muskat/dynamics.hpp"

namespace muskat {

struct InitialDataSpec {
  std::string kind = "gaussian";  // flat | cosine | gaussian | random-bump | file
  int k1 = 1, k2 = 0;             // cosine: U3 = eps cos(pi (k1 a1 + k2 a2) / L)
  double eps = 1e-4;
  double amplitude = 0.1;         // gaussian / random-bump: peak height
  double width = 1.0;
  double cx = 0, cy = 0;
  int count = 3;                  // random-bump: number of Gaussians
  std::string path;               // file
  bool isothermalize = false;
  double iso_tol = 1e-3;
  int iso_max_iter = 200;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Config {
  int n = 64;
  double L = 6.0;
  RunConfig run;
  InitialDataSpec init;
  std::string output_dir = "out";
  // auto | box | periodic; auto selects periodic for cosine-mode data.
  std::string far_field = "auto";

  ParamGrid grid() const { return ParamGrid(n, L); }
};

// Flat "key = value" text, '#' starts a comment. Every key has a default;
// unknown or repeated keys and malformed values raise ConfigError naming the key.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);

void validate_config(const Config& c);

// Run configuration with derived settings resolved (far-field mode).
RunConfig effective_run_config(const Config& c);

// Applies one "key=value" override.
void set_config_value(Config& c, const std::string& key, const std::string& value);

// Every key with its effective value, one per line, full precision. Parsing
// the result gives back an identical Config.
std::string format_config(const Config& c);

}  // namespace muskat
