#pragma once

#include "muskat/quadrature.hpp"

namespace muskat {

// BR(X, omega)(a) = -(1/4pi) PV int (X(a) - X(b)) / |X(a) - X(b)|^3 ^ omega(b) db
//
// Split as BR = BR_flat + BR_rem. BR_flat is the flat-sheet kernel
// (a - b, 0)/|a - b|^3 ^ omega(b): with the box far field it is the punctured
// nearest-image lattice sum, evaluated as a circular FFT convolution; with the
// periodic far field it is -1/2 (R2 w3, -R1 w3, R1 w2 - R2 w1). BR_rem is the
// punctured pair sum of the difference kernel. Both get the local singular
// correction. omega must be tangent (|omega . N| <= 1e-8 (1 + max|omega|) |N|).
VecField3 br_velocity(const QuadratureContext& q, const VecField3& omega);
VecField3 br_velocity(const SurfaceState& s, const GeometryCache& c, const VecField3& omega,
                      const QuadratureConfig& cfg = {});

// Flat-sheet part alone, periodic form (exact velocity of the plane U = 0
// for periodic omega).
VecField3 br_flat(const VecField3& omega);

// Punctured nearest-image lattice sum h^2 sum' (a - b, 0)/|a - b|^3 ^ omega(b),
// restricted to offsets with max-norm <= cutoff.
VecField3 flat_lattice_sum(const VecField3& omega, double cutoff);

// Local singular correction added to the punctured sums (before the -1/4pi
// factor). `with_flat` includes the correction of the flat-sheet lattice sum
// (box far field); without it the flat part is assumed exact (periodic).
VecField3 br_correction(const QuadratureContext& q, const VecField3& omega, bool with_flat);

// Direct Biot-Savart sum at a point at distance >= 2h from every node.
Vec3 velocity_at_point(const SurfaceState& s, const VecField3& omega, const Vec3& x);

}  // namespace muskat
