#include "muskat/quadrature.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace muskat {

namespace {

// Support of the Gaussian window in units of delta; exp(-5.5^2) ~ 7e-14.
constexpr double kWindowReach = 5.5;
constexpr double kCoincident2 = 1e-28;  // (1e-14)^2

double resolved_window(const QuadratureConfig& cfg, double L) {
  return cfg.window > 0 ? cfg.window : L / 8.0;
}

double resolved_cutoff(const QuadratureConfig& cfg, double L) {
  return cfg.cutoff > 0 ? cfg.cutoff : L;
}

double reduce(std::span<const double> x, bool deterministic) {
  if (deterministic) return pairwise_sum(x);
  double s = 0;
  for (double v : x) s += v;
  return s;
}

// Index of dm4 for a multi-index (a, b, i, k) in {0, 1}: number of 2-indices.
int m4_slot(int a, int b, int i, int k) { return a + b + i + k; }

// dm2 index for the symmetric pair (i, k).
int m2_slot(int i, int k) { return i + k; }

}  // namespace

void QuadratureConfig::validate(const ParamGrid& g) const {
  if (ring < 1) throw ConfigError("quad.ring", "must be >= 1");
  if (angular_nodes < 16 || angular_nodes % 2 != 0)
    throw ConfigError("quad.angular_nodes", "must be even and >= 16");
  const double c = resolved_cutoff(*this, g.L());
  if (c > g.L() * (1 + 1e-12)) throw ConfigError("quad.cutoff", "must not exceed the box half-width L");
  const double d = resolved_window(*this, g.L());
  if (kWindowReach * d > c)
    throw ConfigError("quad.window", "window support (5.5 * window) exceeds the far-field cutoff");
}

MomentSet continuous_moments(double g11, double g12, double g22, int angular_nodes) {
  // Integrands are even under theta -> theta + pi: half the circle, doubled.
  MomentSet m;
  const int half = angular_nodes / 2;
  const double w = 2.0 * (2.0 * kPi / angular_nodes);
  for (int j = 0; j < half; ++j) {
    const double th = kPi * j / half;
    const double c = std::cos(th), s = std::sin(th);
    const double q = g11 * c * c + 2 * g12 * c * s + g22 * s * s;
    const double w3 = w / (q * std::sqrt(q));
    const double w5 = w3 / q;
    m.m2[0] += c * c * w3;
    m.m2[1] += c * s * w3;
    m.m2[2] += s * s * w3;
    m.m4[0] += c * c * c * c * w5;
    m.m4[1] += c * c * c * s * w5;
    m.m4[2] += c * c * s * s * w5;
    m.m4[3] += c * s * s * s * w5;
    m.m4[4] += s * s * s * s * w5;
  }
  return m;
}

MomentSet lattice_moments(double g11, double g12, double g22, double h, double delta) {
  MomentSet m;
  const int R = static_cast<int>(std::ceil(kWindowReach * delta / h));
  const double r2max = kWindowReach * kWindowReach * delta * delta;
  const double idd = 1.0 / (delta * delta);
  // Half-plane (j2 > 0, or j2 = 0 and j1 > 0), doubled by evenness.
  for (int j2 = 0; j2 <= R; ++j2)
    for (int j1 = (j2 == 0 ? 1 : -R); j1 <= R; ++j1) {
      const double x = h * j1, y = h * j2;
      const double r2 = x * x + y * y;
      if (r2 > r2max) continue;
      const double q = g11 * x * x + 2 * g12 * x * y + g22 * y * y;
      const double w3 = 2 * h * h * std::exp(-r2 * idd) / (q * std::sqrt(q));
      const double w5 = w3 / q;
      m.m2[0] += x * x * w3;
      m.m2[1] += x * y * w3;
      m.m2[2] += y * y * w3;
      m.m4[0] += x * x * x * x * w5;
      m.m4[1] += x * x * x * y * w5;
      m.m4[2] += x * x * y * y * w5;
      m.m4[3] += x * y * y * y * w5;
      m.m4[4] += y * y * y * y * w5;
    }
  return m;
}

PvMoments pv_moments(const GeometryCache& c, const QuadratureConfig& cfg, double h, double L) {
  const ParamGrid& g = c.X1.grid();
  PvMoments pm;
  pm.delta = resolved_window(cfg, L);
  const double cw = pm.delta * std::sqrt(kPi) / 2;
  for (auto& f : pm.dm2) f = ScalarField(g);
  for (auto& f : pm.dm4) f = ScalarField(g);
  {
    const MomentSet a = continuous_moments(1, 0, 1, cfg.angular_nodes);
    const MomentSet b = lattice_moments(1, 0, 1, h, pm.delta);
    pm.flat_dm2 = cw * a.m2[0] - b.m2[0];
  }
  // Nodes sharing an identical metric (e.g. flat regions) share one evaluation.
  const std::ptrdiff_t N = static_cast<std::ptrdiff_t>(g.size());
  std::vector<std::array<double, 3>> metric(N);
  std::map<std::array<double, 3>, std::size_t> distinct;
  std::vector<std::size_t> slot(N);
  for (std::ptrdiff_t i = 0; i < N; ++i) {
    const Vec3 x1 = c.X1.at(i), x2 = c.X2.at(i);
    const std::array<double, 3> m{dot(x1, x1), dot(x1, x2), dot(x2, x2)};
    slot[i] = distinct.emplace(m, distinct.size()).first->second;
    metric[slot[i]] = m;
  }
  const std::ptrdiff_t M = static_cast<std::ptrdiff_t>(distinct.size());
  std::vector<MomentSet> dm(M);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < M; ++j) {
    const auto& m = metric[j];
    const MomentSet a = continuous_moments(m[0], m[1], m[2], cfg.angular_nodes);
    const MomentSet b = lattice_moments(m[0], m[1], m[2], h, pm.delta);
    for (int k = 0; k < 3; ++k) dm[j].m2[k] = cw * a.m2[k] - b.m2[k];
    for (int k = 0; k < 5; ++k) dm[j].m4[k] = cw * a.m4[k] - b.m4[k];
  }
  for (std::ptrdiff_t i = 0; i < N; ++i) {
    for (int k = 0; k < 3; ++k) pm.dm2[k][i] = dm[slot[i]].m2[k];
    for (int k = 0; k < 5; ++k) pm.dm4[k][i] = dm[slot[i]].m4[k];
  }
  return pm;
}

QuadratureContext::QuadratureContext(const SurfaceState& s, const GeometryCache& c, QuadratureConfig cfg)
    : state_(&s), cache_(&c), cfg_(cfg) {
  const ParamGrid& g = s.grid;
  if (!(c.X1.grid() == g)) throw InvalidInput("quadrature: geometry cache is on a different grid");
  cfg_.validate(g);
  cutoff_ = resolved_cutoff(cfg_, g.L());
  moments_ = pv_moments(c, cfg_, g.h(), g.L());
  dl_diag_ = ScalarField(g);
  br_curv_ = VecField3(g);
  const VecField3* second[2][2] = {{&c.X11, &c.X12}, {&c.X12, &c.X22}};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 X[2] = {c.X1.at(i), c.X2.at(i)};
    const Vec3 XX[2][2] = {{second[0][0]->at(i), second[0][1]->at(i)},
                           {second[1][0]->at(i), second[1][1]->at(i)}};
    const Vec3 N = c.N.at(i);
    double diag = 0;
    Vec3 T;
    for (int a = 0; a < 2; ++a)
      for (int k = 0; k < 2; ++k) {
        const double m2 = moments_.dm2[m2_slot(a, k)][i];
        diag += m2 * dot(XX[a][k], N);
        T -= 0.5 * m2 * XX[a][k];
      }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int ii = 0; ii < 2; ++ii)
          for (int k = 0; k < 2; ++k)
            T += (1.5 * moments_.dm4[m4_slot(a, b, ii, k)][i] * dot(X[a], XX[ii][k])) * X[b];
    dl_diag_[i] = diag / (4 * kPi);
    br_curv_.set(i, T);
  }
}

ScalarField dl_pair_sum(const QuadratureContext& q, const VecField3& psi) {
  const ParamGrid& g = q.grid();
  const int n = g.n();
  const double h = g.h();
  const int dmax = std::min(n / 2, static_cast<int>(std::floor(q.cutoff() / h + 1e-9)));
  const VecField3& U = q.state().U;
  const bool det = q.config().deterministic;
  ScalarField out(g);
  bool coincident = false;

#pragma omp parallel reduction(||: coincident)
  {
    std::vector<double> buf(n), r2buf(n), off1(n), rows(n);
#pragma omp for schedule(static)
    for (int t = 0; t < static_cast<int>(g.size()); ++t) {
      const int t1 = t % n, t2 = t / n;
      for (int s1 = 0; s1 < n; ++s1) off1[s1] = h * g.wrap(t1 - s1);
      const double ut0 = U[0][t], ut1 = U[1][t], ut2 = U[2][t];
      for (int s2 = 0; s2 < n; ++s2) {
        const int d2 = g.wrap(t2 - s2);
        rows[s2] = 0;
        if (std::abs(d2) > dmax) continue;
        const double off2 = h * d2;
        const std::size_t base = static_cast<std::size_t>(s2) * n;
        const double* u0 = U[0].v.data() + base;
        const double* u1 = U[1].v.data() + base;
        const double* u2 = U[2].v.data() + base;
        const double* p0 = psi[0].v.data() + base;
        const double* p1 = psi[1].v.data() + base;
        const double* p2 = psi[2].v.data() + base;
        for (int s1 = 0; s1 < n; ++s1) {
          const double x = off1[s1] + ut0 - u0[s1];
          const double y = off2 + ut1 - u1[s1];
          const double z = ut2 - u2[s1];
          const double r2 = x * x + y * y + z * z;
          r2buf[s1] = r2;
          buf[s1] = (x * p0[s1] + y * p1[s1] + z * p2[s1]) / (r2 * std::sqrt(r2));
        }
        if (d2 == 0) { buf[t1] = 0; r2buf[t1] = 1; }
        for (int s1 = 0; s1 < n; ++s1) {
          if (r2buf[s1] <= kCoincident2) coincident = true;
          if (std::abs(g.wrap(t1 - s1)) > dmax) buf[s1] = 0;
        }
        rows[s2] = reduce(buf, det);
      }
      out[t] = h * h * reduce(rows, det);
    }
  }
  if (coincident) throw SelfIntersection("double layer: two distinct nodes coincide");
  return out;
}

VecField3 br_remainder_pair_sum(const QuadratureContext& q, const VecField3& omega) {
  const ParamGrid& g = q.grid();
  const int n = g.n();
  const double h = g.h();
  const int dmax = std::min(n / 2, static_cast<int>(std::floor(q.cutoff() / h + 1e-9)));
  const int ring = q.config().ring;
  const VecField3& U = q.state().U;
  const GeometryCache& c = q.cache();
  const bool det = q.config().deterministic;
  VecField3 out(g);
  bool coincident = false;

#pragma omp parallel reduction(||: coincident)
  {
    std::vector<double> b0(n), b1(n), b2(n), r2buf(n), off1(n), rows0(n), rows1(n), rows2(n);
#pragma omp for schedule(static)
    for (int t = 0; t < static_cast<int>(g.size()); ++t) {
      const int t1 = t % n, t2 = t / n;
      for (int s1 = 0; s1 < n; ++s1) off1[s1] = h * g.wrap(t1 - s1);
      const double ut0 = U[0][t], ut1 = U[1][t], ut2 = U[2][t];
      const Vec3 A1 = c.X1.at(t), A2 = c.X2.at(t);
      for (int s2 = 0; s2 < n; ++s2) {
        const int d2 = g.wrap(t2 - s2);
        rows0[s2] = rows1[s2] = rows2[s2] = 0;
        if (std::abs(d2) > dmax) continue;
        const double off2 = h * d2;
        const std::size_t base = static_cast<std::size_t>(s2) * n;
        const double* u0 = U[0].v.data() + base;
        const double* u1 = U[1].v.data() + base;
        const double* u2 = U[2].v.data() + base;
        const double* w0 = omega[0].v.data() + base;
        const double* w1 = omega[1].v.data() + base;
        const double* w2 = omega[2].v.data() + base;
        const double off2sq = off2 * off2;
        for (int s1 = 0; s1 < n; ++s1) {
          const double o1 = off1[s1];
          const double x = o1 + ut0 - u0[s1];
          const double y = off2 + ut1 - u1[s1];
          const double z = ut2 - u2[s1];
          const double r2 = x * x + y * y + z * z;
          const double f2 = o1 * o1 + off2sq;
          const double i3 = 1.0 / (r2 * std::sqrt(r2));
          const double f3 = 1.0 / (f2 * std::sqrt(f2));
          r2buf[s1] = r2;
          // a = u/|u|^3 - (o1, off2, 0)/|o|^3
          const double ax = x * i3 - o1 * f3;
          const double ay = y * i3 - off2 * f3;
          const double az = z * i3;
          b0[s1] = ay * w2[s1] - az * w1[s1];
          b1[s1] = az * w0[s1] - ax * w2[s1];
          b2[s1] = ax * w1[s1] - ay * w0[s1];
        }
        if (d2 == 0) { b0[t1] = b1[t1] = b2[t1] = 0; r2buf[t1] = 1; }
        for (int s1 = 0; s1 < n; ++s1) {
          if (r2buf[s1] <= kCoincident2) coincident = true;
          if (std::abs(g.wrap(t1 - s1)) > dmax) b0[s1] = b1[s1] = b2[s1] = 0;
        }
        if (std::abs(d2) <= ring) {
          // Linearized odd kernel (A beta)/|A beta|^3 - (beta, 0)/|beta|^3 crossed
          // with omega at the target; its symmetric ring sum vanishes.
          const Vec3 w{omega[0][t], omega[1][t], omega[2][t]};
          for (int d1 = -ring; d1 <= ring; ++d1) {
            if (d1 * d1 + d2 * d2 > ring * ring || (d1 == 0 && d2 == 0)) continue;
            const double be1 = h * d1, be2 = h * d2;
            const Vec3 p = be1 * A1 + be2 * A2;
            const double pp = dot(p, p), bb = be1 * be1 + be2 * be2;
            const Vec3 a = p * (1.0 / (pp * std::sqrt(pp))) - Vec3{be1, be2, 0} * (1.0 / (bb * std::sqrt(bb)));
            const Vec3 k = cross(a, w);
            const int s1 = ((t1 - d1) % n + n) % n;
            b0[s1] -= k.x;
            b1[s1] -= k.y;
            b2[s1] -= k.z;
          }
        }
        rows0[s2] = reduce(b0, det);
        rows1[s2] = reduce(b1, det);
        rows2[s2] = reduce(b2, det);
      }
      out[0][t] = h * h * reduce(rows0, det);
      out[1][t] = h * h * reduce(rows1, det);
      out[2][t] = h * h * reduce(rows2, det);
    }
  }
  if (coincident) throw SelfIntersection("Birkhoff-Rott: two distinct nodes coincide");
  return out;
}

}  // namespace muskat
