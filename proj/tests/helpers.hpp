#pragma once

#include <cmath>
#include <random>

#include "muskat/grid.hpp"
#include "muskat/surface.hpp"

namespace testutil {

using namespace muskat;

// Random trigonometric polynomial with |k1|, |k2| <= K, scaled to max 1.
inline ScalarField band_limited(const ParamGrid& g, int K, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  ScalarField f(g);
  const double w = kPi / g.L();
  for (int k2 = 0; k2 <= K; ++k2)
    for (int k1 = -K; k1 <= K; ++k1) {
      if (k2 == 0 && k1 <= 0) continue;
      const double a = u(rng), b = u(rng);
      for (int i2 = 0; i2 < g.n(); ++i2)
        for (int i1 = 0; i1 < g.n(); ++i1) {
          const double ph = w * (k1 * g.alpha(i1) + k2 * g.alpha(i2));
          f[g.index(i1, i2)] += a * std::cos(ph) + b * std::sin(ph);
        }
    }
  const double m = max_abs(f);
  for (double& x : f.v) x /= m;
  return f;
}

template <class F>
ScalarField sample(const ParamGrid& g, F f) {
  ScalarField s(g);
  for (int i2 = 0; i2 < g.n(); ++i2)
    for (int i1 = 0; i1 < g.n(); ++i1) s[g.index(i1, i2)] = f(g.alpha(i1), g.alpha(i2));
  return s;
}

inline double max_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_diff(const VecField3& a, const VecField3& b) {
  return std::max({max_diff(a[0], b[0]), max_diff(a[1], b[1]), max_diff(a[2], b[2])});
}

// Values of a fine-grid field at the nodes of a coarser grid.
inline ScalarField restrict_to(const ScalarField& f, const ParamGrid& coarse) {
  const int s = f.grid.n() / coarse.n();
  ScalarField out(coarse);
  for (int i2 = 0; i2 < coarse.n(); ++i2)
    for (int i1 = 0; i1 < coarse.n(); ++i1) out[coarse.index(i1, i2)] = f[f.grid.index(i1 * s, i2 * s)];
  return out;
}

inline VecField3 restrict_to(const VecField3& f, const ParamGrid& coarse) {
  return VecField3(restrict_to(f[0], coarse), restrict_to(f[1], coarse), restrict_to(f[2], coarse));
}

inline SurfaceState graph(const ParamGrid& g, const ScalarField& phi) {
  VecField3 u(g);
  u[2] = phi;
  return SurfaceState(g, u);
}

}  // namespace testutil
