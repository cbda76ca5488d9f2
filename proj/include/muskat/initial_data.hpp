#pragma once

#include "muskat/config.hpp"

namespace muskat {

struct InitialData {
  SurfaceState state;
  double J0 = 0;       // isothermal defect before isothermalization
  double J = 0;        // after (equal to J0 when not requested)
  int iso_iterations = 0;
};

// Builds the initial surface. Gaussian and random-bump data are checked
// against the boundary-margin condition; cosine modes are periodic across the
// box and exempt.
InitialData make_initial_data(const InitialDataSpec& spec, const ParamGrid& g);

// U = (0, 0, amplitude exp(-|a - c|^2 / width^2))
SurfaceState gaussian_bump(const ParamGrid& g, double amplitude, double width, double cx = 0, double cy = 0);
// U = (0, 0, eps cos(pi (k1 a1 + k2 a2) / L))
SurfaceState cosine_mode(const ParamGrid& g, int k1, int k2, double eps);

// Builds the initial data described by `c` and runs it with the effective
// run configuration.
RunResult run_from_config(const Config& c, const RunObserver& obs = {}, InitialData* init = nullptr);

}  // namespace muskat
