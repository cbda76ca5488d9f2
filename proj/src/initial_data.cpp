#include "muskat/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "muskat/snapshot.hpp"

namespace muskat {

namespace {

VecField3 bump_field(const ParamGrid& g, double amplitude, double width, double cx, double cy) {
  VecField3 u(g);
  for (int i2 = 0; i2 < g.n(); ++i2)
    for (int i1 = 0; i1 < g.n(); ++i1) {
      const double x = g.alpha(i1) - cx, y = g.alpha(i2) - cy;
      u[2][g.index(i1, i2)] = amplitude * std::exp(-(x * x + y * y) / (width * width));
    }
  return u;
}

}  // namespace

SurfaceState gaussian_bump(const ParamGrid& g, double amplitude, double width, double cx, double cy) {
  return SurfaceState::checked(g, bump_field(g, amplitude, width, cx, cy));
}

SurfaceState cosine_mode(const ParamGrid& g, int k1, int k2, double eps) {
  VecField3 u(g);
  const double w = kPi / g.L();
  for (int i2 = 0; i2 < g.n(); ++i2)
    for (int i1 = 0; i1 < g.n(); ++i1)
      u[2][g.index(i1, i2)] = eps * std::cos(w * (k1 * g.alpha(i1) + k2 * g.alpha(i2)));
  return SurfaceState(g, std::move(u));
}

InitialData make_initial_data(const InitialDataSpec& spec, const ParamGrid& g) {
  spec.validate();
  InitialData out;
  if (spec.kind == "flat") {
    out.state = SurfaceState::flat(g);
  } else if (spec.kind == "cosine") {
    out.state = cosine_mode(g, spec.k1, spec.k2, spec.eps);
  } else if (spec.kind == "gaussian") {
    out.state = gaussian_bump(g, spec.amplitude, spec.width, spec.cx, spec.cy);
  } else if (spec.kind == "random-bump") {
    // Seeded superposition of Gaussians, rescaled to peak height `amplitude`.
    // Centres stay far enough inside that each bump is below 1e-7 of its
    // height on the margin frame (|alpha_j| >= 3L/4).
    const double reach = spec.width * std::sqrt(std::log(1e7));
    const double half = std::min(0.25 * g.L(), 0.75 * g.L() - reach);
    if (!(half >= 0)) throw ConfigError("init.width", "too wide for the box margin with random-bump data");
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> pos(-half, half);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    std::uniform_real_distribution<double> wid(0.6 * spec.width, spec.width);
    VecField3 u(g);
    for (int b = 0; b < spec.count; ++b) {
      const double cx = pos(rng), cy = pos(rng), a = amp(rng), w = wid(rng);
      const VecField3 one = bump_field(g, a, w, cx, cy);
      for (std::size_t i = 0; i < g.size(); ++i) u[2][i] += one[2][i];
    }
    const double m = max_abs(u[2]);
    if (m > 0)
      for (double& x : u[2].v) x *= spec.amplitude / m;
    out.state = SurfaceState::checked(g, std::move(u));
  } else {
    Snapshot snap = load_snapshot(spec.path);
    if (!(snap.state.grid == g))
      throw ConfigError("init.path", "snapshot grid (n = " + std::to_string(snap.state.grid.n()) +
                                         ") does not match grid.n / grid.L");
    out.state = std::move(snap.state);
  }
  out.J0 = out.J = isothermal_defect(out.state);
  if (spec.isothermalize) {
    IsothermalizeResult r = isothermalize(out.state, spec.iso_tol, spec.iso_max_iter);
    out.state = std::move(r.state);
    out.J = r.J;
    out.iso_iterations = r.iterations;
  }
  return out;
}

RunResult run_from_config(const Config& c, const RunObserver& obs, InitialData* init) {
  validate_config(c);
  InitialData d = make_initial_data(c.init, c.grid());
  RunResult r = run(effective_run_config(c), d.state, obs);
  if (init) *init = std::move(d);
  return r;
}

}  // namespace muskat
