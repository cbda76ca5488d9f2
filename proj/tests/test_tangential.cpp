#include <doctest.h>

#include "helpers.hpp"
#include "muskat/initial_data.hpp"
#include "muskat/spectral.hpp"
#include "muskat/tangential.hpp"

using namespace muskat;
using namespace testutil;

namespace {
const ParamGrid g32(32, 6.0);

VecField3 synthetic_br(const ParamGrid& g, unsigned seed) {
  return VecField3(band_limited(g, 4, seed), band_limited(g, 4, seed + 1), band_limited(g, 4, seed + 2));
}
}  // namespace

TEST_CASE("zero Birkhoff-Rott velocity gives zero tangential coefficients") {
  const GeometryCache c = geometry(gaussian_bump(g32, 0.3, 1.0));
  const TangentialFields t = tangential_coeffs(c, VecField3(g32));
  CHECK(max_abs(t.C1) == 0);
  CHECK(max_abs(t.C2) == 0);
}

TEST_CASE("cancellation identity") {
  // (d1 BR . X1 - d2 BR . X2) + (d1 C1 - d2 C2) |X2|^2 vanishes up to the zero
  // mode of a, which the periodic inverse Laplacian cannot carry.
  // The spectral operators drop the Nyquist modes of a; n = 128 resolves the
  // products of the bump with the synthetic br far below them.
  const ParamGrid g128(128, 6.0);
  for (double amp : {0.0, 0.2}) {
    const SurfaceState s = gaussian_bump(g128, amp, 1.0);
    const GeometryCache c = geometry(s);
    const VecField3 br = synthetic_br(g128, 3);
    const TangentialFields t = tangential_coeffs(c, br);
    const VecField3 d1 = spectral::derivative(br, 1), d2 = spectral::derivative(br, 2);
    const ScalarField c11 = spectral::derivative(t.C1, 1), c22 = spectral::derivative(t.C2, 2);
    ScalarField a(g128);
    for (std::size_t i = 0; i < a.size(); ++i)
      a[i] = (dot(d2.at(i), c.X2.at(i)) - dot(d1.at(i), c.X1.at(i))) / dot(c.X2.at(i), c.X2.at(i));
    const double abar = mean(a);
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double x2 = dot(c.X2.at(i), c.X2.at(i));
      m = std::max(m, std::abs(dot(d1.at(i), c.X1.at(i)) - dot(d2.at(i), c.X2.at(i)) + (c11[i] - c22[i] + abar) * x2));
    }
    MESSAGE("amplitude ", amp, ": identity residual ", m, ", mean of a ", abar);
    CHECK(m <= 1e-8);
    if (amp == 0) CHECK(abar == doctest::Approx(0).epsilon(1e-14));
  }
}

TEST_CASE("flat sheet: the tangential terms keep the parameterization isothermal") {
  const GeometryCache c = geometry(SurfaceState::flat(g32));
  const VecField3 br = synthetic_br(g32, 7);
  const VecField3 xt = surface_velocity(c, br, tangential_coeffs(c, br));
  const VecField3 d1 = spectral::derivative(xt, 1), d2 = spectral::derivative(xt, 2);
  // d/dt f = X1 . X1t - X2 . X2t, d/dt g = X1t . X2 + X1 . X2t. On the
  // plane this makes the horizontal velocity conformal, hence constant: the
  // tangential terms cancel the (mean-free) horizontal part of br entirely.
  CHECK(max_abs(br[0]) > 0.5);
  CHECK(max_abs(xt[0]) < 1e-13);
  CHECK(max_abs(xt[1]) < 1e-13);
  CHECK(max_diff(xt[2], br[2]) < 1e-15);
  ScalarField ft(g32), gt(g32);
  for (std::size_t i = 0; i < g32.size(); ++i) {
    ft[i] = d1[0][i] - d2[1][i];
    gt[i] = d1[1][i] + d2[0][i];
  }
  CHECK(max_abs(ft) < 1e-12);
  CHECK(max_abs(gt) < 1e-12);
}

TEST_CASE("tangential coefficients against the real-space kernel") {
  // Flat sheet with compactly supported br: C1 = K1 * a - K2 * b with
  // K_j(x) = x_j / (2 pi |x|^2). The punctured sum of this 1/r kernel is
  // first-order accurate, so the deviation must shrink under refinement.
  auto deviation = [](int n) {
    const ParamGrid g(n, 6.0);
    const GeometryCache c = geometry(SurfaceState::flat(g));
    VecField3 br(g);
    br[0] = sample(g, [](double x, double y) { return std::exp(-(x * x + y * y)); });
    br[1] = sample(g, [](double x, double y) { return x * std::exp(-(x * x + y * y)); });
    const TangentialFields t = tangential_coeffs(c, br);
    const VecField3 d1 = spectral::derivative(br, 1), d2 = spectral::derivative(br, 2);
    ScalarField a(g), b(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      a[i] = d2[1][i] - d1[0][i];
      b[i] = d1[1][i] + d2[0][i];
    }
    const double h = g.h();
    double e = 0;
    for (int t2 = n / 4; t2 < 3 * n / 4; ++t2)
      for (int t1 = n / 4; t1 < 3 * n / 4; ++t1) {
        double c1 = 0, c2 = 0;
        for (int s2 = 0; s2 < n; ++s2)
          for (int s1 = 0; s1 < n; ++s1) {
            if (s1 == t1 && s2 == t2) continue;
            const double x = g.alpha(t1) - g.alpha(s1), y = g.alpha(t2) - g.alpha(s2);
            const double r2 = 2 * kPi * (x * x + y * y);
            const std::size_t k = g.index(s1, s2);
            c1 += x / r2 * a[k] - y / r2 * b[k];
            c2 += -y / r2 * a[k] - x / r2 * b[k];
          }
        const std::size_t i = g.index(t1, t2);
        e = std::max({e, std::abs(h * h * c1 - t.C1[i]), std::abs(h * h * c2 - t.C2[i])});
      }
    return std::make_pair(e, std::max(max_abs(t.C1), max_abs(t.C2)));
  };
  const auto [e16, c16] = deviation(16);
  const auto [e32, c32] = deviation(32);
  MESSAGE("real-space deviation ", e16, " -> ", e32, " (max |C| ", c16, ")");
  CHECK(e16 < 0.2 * c16);
  CHECK(e32 < 0.6 * e16);
}

TEST_CASE("surface velocity assembly") {
  const GeometryCache flat = geometry(SurfaceState::flat(g32));
  VecField3 br(g32);
  br[2] = band_limited(g32, 4, 21);
  const VecField3 xt = surface_velocity(flat, br, tangential_coeffs(flat, br));
  CHECK(max_diff(xt[2], br[2]) == 0);
  CHECK(max_abs(xt[0]) < 1e-15);
  CHECK(max_abs(xt[1]) < 1e-15);

  const GeometryCache c = geometry(gaussian_bump(g32, 0.3, 1.0));
  const VecField3 b1 = synthetic_br(g32, 30);
  VecField3 b2 = b1;
  for (int k = 0; k < 3; ++k)
    for (double& x : b2[k].v) x *= 2;
  const VecField3 x1 = surface_velocity(c, b1, tangential_coeffs(c, b1));
  const VecField3 x2 = surface_velocity(c, b2, tangential_coeffs(c, b2));
  double e = 0;
  for (int k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < g32.size(); ++i) e = std::max(e, std::abs(x2[k][i] - 2 * x1[k][i]));
  CHECK(e < 1e-13 * max_abs(x2));

  // Tangential terms never change the normal motion.
  double nm = 0;
  for (std::size_t i = 0; i < g32.size(); ++i) nm = std::max(nm, std::abs(dot(x1.at(i) - b1.at(i), c.N.at(i))));
  CHECK(nm < 1e-12);
}

TEST_CASE("degenerate tangent vectors are rejected") {
  // X1 = (1 - cos(pi a1 / L), 0, 0) vanishes on the line a1 = 0.
  const double w = kPi / g32.L();
  VecField3 u(g32);
  u[0] = sample(g32, [&](double a, double) { return -std::sin(w * a) / w; });
  const SurfaceState s(g32, u);
  CHECK_THROWS_AS(tangential_coeffs(geometry(s), VecField3(g32)), DegenerateSurface);
}
