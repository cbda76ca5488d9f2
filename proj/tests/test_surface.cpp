#include <doctest.h>

#include <cstring>
#include <random>

#include "helpers.hpp"
#include "muskat/initial_data.hpp"
#include "muskat/snapshot.hpp"
#include "muskat/spectral.hpp"

using namespace muskat;
using namespace testutil;

namespace {
const ParamGrid g32(32, 6.0);

ScalarField bump(const ParamGrid& g, double amp, double w = 1.0) {
  return sample(g, [=](double a, double b) { return amp * std::exp(-(a * a + b * b) / (w * w)); });
}
}  // namespace

TEST_CASE("flat geometry") {
  const GeometryCache c = geometry(SurfaceState::flat(g32));
  for (std::size_t i = 0; i < g32.size(); ++i) {
    CHECK(c.N[0][i] == 0);
    CHECK(c.N[1][i] == 0);
    CHECK(c.N[2][i] == 1);
  }
  CHECK(c.min_normN == 1);
  CHECK(chord_arc_gauge(SurfaceState::flat(g32), 1) == 1);
  const IsothermalResidual r = isothermal_residual(SurfaceState::flat(g32));
  CHECK(max_abs(r.f) == 0);
  CHECK(max_abs(r.g) == 0);
  CHECK(sobolev_norm(SurfaceState::flat(g32), 4) == 0);
}

TEST_CASE("graph normal and isothermal residual") {
  const ScalarField phi = bump(g32, 0.3);
  const GeometryCache c = geometry(graph(g32, phi));
  const ScalarField p1 = spectral::derivative(phi, 1), p2 = spectral::derivative(phi, 2);
  const IsothermalResidual r = isothermal_residual(c);
  for (std::size_t i = 0; i < g32.size(); ++i) {
    CHECK(c.N[0][i] == doctest::Approx(-p1[i]).epsilon(1e-13));
    CHECK(c.N[1][i] == doctest::Approx(-p2[i]).epsilon(1e-13));
    CHECK(c.N[2][i] == 1);
    CHECK(std::abs(r.f[i] - 0.5 * (p1[i] * p1[i] - p2[i] * p2[i])) < 1e-15);
    CHECK(std::abs(r.g[i] - p1[i] * p2[i]) < 1e-15);
  }
}

TEST_CASE("isothermal residual of a stretched parameterization") {
  // X = (2 a1, a2, 0) is not periodic in U; build its geometry directly.
  GeometryCache c;
  c.X1 = VecField3(g32);
  c.X2 = VecField3(g32);
  for (std::size_t i = 0; i < g32.size(); ++i) {
    c.X1[0][i] = 2;
    c.X2[1][i] = 1;
  }
  const IsothermalResidual r = isothermal_residual(c);
  for (std::size_t i = 0; i < g32.size(); ++i) {
    CHECK(r.f[i] == 1.5);
    CHECK(r.g[i] == 0);
  }
  const Vec3 n = cross(c.X1.at(0), c.X2.at(0));
  CHECK(n.z == 2);
}

TEST_CASE("chord-arc gauge of graphs is 1; strided estimate tracks the exact value") {
  InitialDataSpec spec;
  spec.kind = "random-bump";
  spec.amplitude = 0.3;
  spec.seed = 11;
  const SurfaceState s = make_initial_data(spec, g32).state;
  const double exact = chord_arc_gauge(s, 1), strided = chord_arc_gauge(s, 4);
  CHECK(exact == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(strided - exact) <= 0.05 * exact);

  // A folded (non-graph) sheet has gauge > 1.
  VecField3 u(g32);
  const double w = kPi / g32.L();
  u[0] = sample(g32, [&](double a, double) { return 0.8 / w * std::sin(w * a); });
  u[2] = sample(g32, [&](double a, double) { return 0.8 / w * std::cos(w * a); });
  const SurfaceState fold(g32, u);
  CHECK(chord_arc_gauge(fold, 1) > 1.0);
  CHECK(chord_arc_gauge(fold, 4) <= chord_arc_gauge(fold, 1) + 1e-15);
}

TEST_CASE("Sobolev norm of a single mode matches its closed form") {
  const double L = g32.L(), w = kPi / L;
  const ScalarField m = sample(g32, [&](double a, double) { return std::cos(w * a); });
  const double want = std::sqrt(2 * L * L) + w * w * 2 * L * L + std::pow(w, 8) * 2 * L * L;
  CHECK(sobolev_norm(graph(g32, m), 4) == doctest::Approx(want).epsilon(1e-13));

  // Homogeneity of each summand under doubling X3.
  ScalarField m2 = m;
  for (double& x : m2.v) x *= 2;
  const double l2 = std::sqrt(2 * L * L), rest = want - l2;
  CHECK(sobolev_norm(graph(g32, m2), 4) == doctest::Approx(2 * l2 + 4 * rest).epsilon(1e-13));
  CHECK_THROWS_AS(sobolev_norm(graph(g32, m), 9), ResolutionError);
}

TEST_CASE("isothermalize") {
  const IsothermalizeResult flat = isothermalize(SurfaceState::flat(g32), 1e-3, 200);
  CHECK(flat.J == 0);
  CHECK(max_abs(flat.state.U) == 0);

  // A vertical translation is already isothermal.
  const SurfaceState lifted = graph(g32, ScalarField(g32, 0.7));
  const IsothermalizeResult fixed = isothermalize(lifted, 1e-3, 200);
  CHECK(fixed.J <= 1e-28);
  CHECK(max_diff(fixed.state.U, lifted.U) == 0);

  const ParamGrid g64(64, 6.0);
  const IsothermalizeResult r = isothermalize(graph(g64, bump(g64, 0.1)), 1e-3, 200);
  MESSAGE("isothermalize 0.1 bump: J0=", r.J0, " J=", r.J, " iterations=", r.iterations);
  CHECK(r.J <= r.J0 / 100);
  CHECK(r.iterations <= 200);
  // The reparameterized surface is the same surface: heights agree pointwise
  // with the bump evaluated at the moved horizontal positions.
  double e = 0;
  for (int i2 = 0; i2 < 64; ++i2)
    for (int i1 = 0; i1 < 64; ++i1) {
      const std::size_t i = g64.index(i1, i2);
      const double x = g64.alpha(i1) + r.state.U[0][i], y = g64.alpha(i2) + r.state.U[1][i];
      e = std::max(e, std::abs(r.state.U[2][i] - 0.1 * std::exp(-(x * x + y * y))));
    }
  CHECK(e < 1e-8);
}

TEST_CASE("boundary margin is enforced by the checked constructor") {
  CHECK_NOTHROW(SurfaceState::checked(g32, graph(g32, bump(g32, 0.1)).U));
  CHECK_THROWS_AS(SurfaceState::checked(g32, graph(g32, bump(g32, 0.1, 3.0)).U), InvalidInput);
  VecField3 bad(g32);
  bad[2][5] = std::nan("");
  CHECK_THROWS_AS(SurfaceState(g32, bad), InvalidInput);
}

TEST_CASE("snapshot round-trip is byte-identical") {
  const SurfaceState s = graph(g32, band_limited(g32, 4, 9));
  const std::string a = encode_snapshot(s, 0.375);
  const Snapshot b = decode_snapshot(a);
  CHECK(b.t == 0.375);
  CHECK(max_diff(b.state.U, s.U) == 0);
  CHECK(encode_snapshot(b.state, b.t) == a);
}

TEST_CASE("corrupt snapshots raise format errors with byte offsets") {
  const std::string a = encode_snapshot(SurfaceState::flat(g32), 0);
  const std::string cut = a.substr(0, a.size() - 5);
  std::string msg1, msg2;
  try {
    decode_snapshot(cut);
  } catch (const FormatError& e) {
    msg1 = e.what();
    CHECK(e.offset() > 0);
  }
  try {
    decode_snapshot(cut);
  } catch (const FormatError& e) {
    msg2 = e.what();
  }
  CHECK(!msg1.empty());
  CHECK(msg1 == msg2);
  CHECK_THROWS_AS(decode_snapshot("NOT A SNAPSHOT\n"), FormatError);
  std::string nan = a;
  const double q = std::nan("");
  std::memcpy(nan.data() + nan.size() - 8, &q, 8);
  CHECK_THROWS_AS(decode_snapshot(nan), FormatError);
}
