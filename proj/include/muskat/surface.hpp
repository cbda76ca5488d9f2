#pragma once

#include "muskat/grid.hpp"

namespace muskat {

// Interface X(alpha) = (alpha, 0) + U(alpha) sampled on the parameter grid.
struct SurfaceState {
  ParamGrid grid;
  VecField3 U;

  SurfaceState() = default;
  // Only checks finiteness and grid consistency.
  SurfaceState(const ParamGrid& g, VecField3 u);

  // Additionally enforces the boundary-margin condition (margin_ratio <= 1e-6).
  static SurfaceState checked(const ParamGrid& g, VecField3 u);

  static SurfaceState flat(const ParamGrid& g) { return SurfaceState(g, VecField3(g)); }

  Vec3 X(std::size_t i) const;
};

constexpr double kMarginTolerance = 1e-6;

// max|U| over the outer 12.5% frame of the box divided by max|U| (0 for U = 0).
double margin_ratio(const SurfaceState& s);

struct GeometryCache {
  VecField3 X1, X2;          // tangents
  VecField3 X11, X12, X22;   // second derivatives
  VecField3 N;               // X1 ^ X2 (unnormalized)
  ScalarField normN;
  double min_normN = 0;
};

constexpr double kDegenerateNormal = 1e-10;

GeometryCache geometry(const SurfaceState& s);

// max over sampled pairs of |beta| / |X(alpha) - X(alpha - beta)| using the
// nearest-image offset beta. `stride` subsamples the points alpha; stride = 1
// evaluates every pair.
double chord_arc_gauge(const SurfaceState& s, int stride);

struct IsothermalResidual {
  ScalarField f;  // (|X1|^2 - |X2|^2) / 2
  ScalarField g;  // X1 . X2
};

IsothermalResidual isothermal_residual(const SurfaceState& s);
IsothermalResidual isothermal_residual(const GeometryCache& c);

// J = integral of f^2 + g^2 over the box.
double isothermal_defect(const SurfaceState& s);

// ||U1||_{L3} + ||U2||_{L3} + ||U3||_{L2} + ||grad U||^2_{L2}
//   + ||d1^k U||^2_{L2} + ||d2^k U||^2_{L2}
double sobolev_norm(const SurfaceState& s, int k);

struct IsothermalizeResult {
  SurfaceState state;
  double J0 = 0;
  double J = 0;
  int iterations = 0;
};

// Reparameterizes the surface by X o (id + psi), psi periodic, reducing J by
// preconditioned gradient descent until J <= tol * J0 or max_iter steps.
IsothermalizeResult isothermalize(const SurfaceState& s, double tol, int max_iter);

}  // namespace muskat
