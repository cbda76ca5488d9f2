#include "muskat/birkhoff_rott.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <tuple>

#include "muskat/spectral.hpp"

namespace muskat {

VecField3 br_flat(const VecField3& w) {
  const ScalarField r1w3 = spectral::riesz(w[2], 1), r2w3 = spectral::riesz(w[2], 2);
  const ScalarField r1w2 = spectral::riesz(w[1], 1), r2w1 = spectral::riesz(w[0], 2);
  VecField3 out(w.grid());
  for (std::size_t i = 0; i < w.size(); ++i) {
    out[0][i] = -0.5 * r2w3[i];
    out[1][i] = 0.5 * r1w3[i];
    out[2][i] = -0.5 * (r1w2[i] - r2w1[i]);
  }
  return out;
}

namespace {

struct FlatKernel {
  spectral::Spectrum k1, k2;  // spectra of h^2 d_j h / |d h|^3 at circular offsets
};

const FlatKernel& flat_kernel(const ParamGrid& g, double cutoff) {
  static std::mutex mu;
  static std::map<std::tuple<int, double, double>, FlatKernel> cache;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_tuple(g.n(), g.L(), cutoff);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const int n = g.n();
  const double h = g.h();
  const int dmax = std::min(n / 2, static_cast<int>(std::floor(cutoff / h + 1e-9)));
  ScalarField a(g), b(g);
  for (int i2 = 0; i2 < n; ++i2)
    for (int i1 = 0; i1 < n; ++i1) {
      const int d1 = g.wrap(i1), d2 = g.wrap(i2);
      if ((d1 == 0 && d2 == 0) || std::abs(d1) > dmax || std::abs(d2) > dmax) continue;
      const double x = h * d1, y = h * d2;
      const double r2 = x * x + y * y;
      const double w = h * h / (r2 * std::sqrt(r2));
      a[g.index(i1, i2)] = x * w;
      b[g.index(i1, i2)] = y * w;
    }
  FlatKernel k{spectral::forward(a), spectral::forward(b)};
  return cache.emplace(key, std::move(k)).first->second;
}

ScalarField convolve(const spectral::Spectrum& k, const ScalarField& f) {
  spectral::Spectrum s = spectral::forward(f);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= k[i];
  return spectral::inverse(f.grid, std::move(s));
}

}  // namespace

VecField3 flat_lattice_sum(const VecField3& w, double cutoff) {
  const FlatKernel& K = flat_kernel(w.grid(), cutoff);
  const ScalarField k1w3 = convolve(K.k1, w[2]), k2w3 = convolve(K.k2, w[2]);
  const ScalarField k1w2 = convolve(K.k1, w[1]), k2w1 = convolve(K.k2, w[0]);
  VecField3 out(w.grid());
  for (std::size_t i = 0; i < w.size(); ++i) {
    out[0][i] = k2w3[i];
    out[1][i] = -k1w3[i];
    out[2][i] = k1w2[i] - k2w1[i];
  }
  return out;
}

VecField3 br_correction(const QuadratureContext& q, const VecField3& w, bool with_flat) {
  const GeometryCache& c = q.cache();
  const PvMoments& m = q.moments();
  const VecField3 dw[2] = {spectral::derivative(w, 1), spectral::derivative(w, 2)};
  const VecField3& T = q.br_curvature();
  const Vec3 e[2] = {{1, 0, 0}, {0, 1, 0}};
  VecField3 out(w.grid());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Vec3 X[2] = {c.X1.at(i), c.X2.at(i)};
    const Vec3 wi[2] = {dw[0].at(i), dw[1].at(i)};
    Vec3 v = cross(T.at(i), w.at(i));
    for (int a = 0; a < 2; ++a)
      for (int k = 0; k < 2; ++k) v -= m.dm2[a + k][i] * cross(X[a], wi[k]);
    if (!with_flat)
      for (int a = 0; a < 2; ++a) v += m.flat_dm2 * cross(e[a], wi[a]);
    out.set(i, v);
  }
  return out;
}

VecField3 br_velocity(const QuadratureContext& q, const VecField3& w) {
  const GeometryCache& c = q.cache();
  if (!(w.grid() == q.grid())) throw InvalidInput("br_velocity: density on a different grid");
  if (!all_finite(w)) throw InvalidInput("br_velocity: non-finite density");
  const double tol = 1e-8 * (1 + max_abs(w));
  for (std::size_t i = 0; i < w.size(); ++i)
    if (std::abs(dot(w.at(i), c.N.at(i))) > tol * c.normN[i])
      throw InvalidInput("br_velocity: density is not tangent to the surface");
  if (max_abs(w) == 0) return VecField3(w.grid());
  const bool box = q.config().far_field == QuadratureConfig::FarField::box;
  VecField3 out = box ? VecField3(w.grid()) : br_flat(w);
  VecField3 sum = br_remainder_pair_sum(q, w);
  const VecField3 cor = br_correction(q, w, box);
  if (box) {
    const VecField3 flat = flat_lattice_sum(w, q.cutoff());
    for (int k = 0; k < 3; ++k)
      for (std::size_t i = 0; i < w.size(); ++i) sum[k][i] += flat[k][i];
  }
  for (int k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < w.size(); ++i) out[k][i] -= (sum[k][i] + cor[k][i]) / (4 * kPi);
  return out;
}

VecField3 br_velocity(const SurfaceState& s, const GeometryCache& c, const VecField3& omega,
                      const QuadratureConfig& cfg) {
  return br_velocity(QuadratureContext(s, c, cfg), omega);
}

Vec3 velocity_at_point(const SurfaceState& s, const VecField3& omega, const Vec3& x) {
  const ParamGrid& g = s.grid;
  if (!(omega.grid() == g)) throw InvalidInput("velocity_at_point: density on a different grid");
  const double h = g.h();
  std::vector<double> c0(g.size()), c1(g.size()), c2(g.size());
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 u = x - s.X(i);
    const double r = norm(u);
    dmin = std::min(dmin, r);
    const Vec3 k = cross(u * (1.0 / (r * r * r)), omega.at(i));
    c0[i] = k.x;
    c1[i] = k.y;
    c2[i] = k.z;
  }
  if (dmin < 2 * h)
    throw InvalidInput("velocity_at_point: point lies within 2h of the surface; use br_velocity on the surface");
  const double f = -h * h / (4 * kPi);
  return {f * pairwise_sum(c0), f * pairwise_sum(c1), f * pairwise_sum(c2)};
}

}  // namespace muskat
