#pragma once

#include "muskat/surface.hpp"

namespace muskat {

struct TangentialFields {
  ScalarField C1, C2;
};

// With a = (d2 BR . X2 - d1 BR . X1) / |X2|^2 and b = (d1 BR . X2 + d2 BR . X1) / |X1|^2:
//   C1 = d1 Delta^{-1} a - d2 Delta^{-1} b,   C2 = -d2 Delta^{-1} a - d1 Delta^{-1} b.
TangentialFields tangential_coeffs(const GeometryCache& c, const VecField3& br);

// X_t = BR + C1 X1 + C2 X2
VecField3 surface_velocity(const GeometryCache& c, const VecField3& br, const TangentialFields& t);

}  // namespace muskat
