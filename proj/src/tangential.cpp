#include "muskat/tangential.hpp"

#include "muskat/spectral.hpp"

namespace muskat {

TangentialFields tangential_coeffs(const GeometryCache& c, const VecField3& br) {
  const ParamGrid& g = br.grid();
  if (!(c.X1.grid() == g)) throw InvalidInput("tangential_coeffs: fields on different grids");
  const VecField3 d1 = spectral::derivative(br, 1);
  const VecField3 d2 = spectral::derivative(br, 2);
  ScalarField a(g), b(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 x1 = c.X1.at(i), x2 = c.X2.at(i);
    const double n1 = dot(x1, x1), n2 = dot(x2, x2);
    if (n1 <= kDegenerateNormal || n2 <= kDegenerateNormal)
      throw DegenerateSurface("tangential_coeffs: vanishing tangent vector");
    a[i] = (dot(d2.at(i), x2) - dot(d1.at(i), x1)) / n2;
    b[i] = (dot(d1.at(i), x2) + dot(d2.at(i), x1)) / n1;
  }
  TangentialFields t;
  const ScalarField a1 = spectral::inv_lap_grad(a, 1), a2 = spectral::inv_lap_grad(a, 2);
  const ScalarField b1 = spectral::inv_lap_grad(b, 1), b2 = spectral::inv_lap_grad(b, 2);
  t.C1 = ScalarField(g);
  t.C2 = ScalarField(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    t.C1[i] = a1[i] - b2[i];
    t.C2[i] = -a2[i] - b1[i];
  }
  return t;
}

VecField3 surface_velocity(const GeometryCache& c, const VecField3& br, const TangentialFields& t) {
  VecField3 v(br.grid());
  for (int k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < br.size(); ++i)
      v[k][i] = br[k][i] + t.C1[i] * c.X1[k][i] + t.C2[i] * c.X2[k][i];
  return v;
}

}  // namespace muskat
