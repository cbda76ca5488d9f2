#include "muskat/surface.hpp"

#include <algorithm>

#include "muskat/spectral.hpp"

namespace muskat {

SurfaceState::SurfaceState(const ParamGrid& g, VecField3 u) : grid(g), U(std::move(u)) {
  if (!(U.grid() == grid)) throw InvalidInput("surface: deviation field is on a different grid");
  if (!all_finite(U)) throw InvalidInput("surface: non-finite deviation field");
}

SurfaceState SurfaceState::checked(const ParamGrid& g, VecField3 u) {
  SurfaceState s(g, std::move(u));
  const double r = margin_ratio(s);
  if (r > kMarginTolerance)
    throw InvalidInput("surface: deviation does not decay in the boundary frame (ratio " +
                       std::to_string(r) + ")");
  return s;
}

Vec3 SurfaceState::X(std::size_t i) const {
  const int n = grid.n();
  const int i1 = static_cast<int>(i % n), i2 = static_cast<int>(i / n);
  return {grid.alpha(i1) + U[0][i], grid.alpha(i2) + U[1][i], U[2][i]};
}

double margin_ratio(const SurfaceState& s) {
  const ParamGrid& g = s.grid;
  const double edge = 0.75 * g.L();
  double inner = 0, frame = 0;
  for (int i2 = 0; i2 < g.n(); ++i2)
    for (int i1 = 0; i1 < g.n(); ++i1) {
      const std::size_t i = g.index(i1, i2);
      const double m = std::max({std::abs(s.U[0][i]), std::abs(s.U[1][i]), std::abs(s.U[2][i])});
      inner = std::max(inner, m);
      if (std::abs(g.alpha(i1)) >= edge || std::abs(g.alpha(i2)) >= edge) frame = std::max(frame, m);
    }
  return inner == 0 ? 0.0 : frame / inner;
}

GeometryCache geometry(const SurfaceState& s) {
  const ParamGrid& g = s.grid;
  GeometryCache c;
  c.X1 = spectral::derivative(s.U, 1);
  c.X2 = spectral::derivative(s.U, 2);
  for (double& x : c.X1[0].v) x += 1.0;
  for (double& x : c.X2[1].v) x += 1.0;
  c.X11 = VecField3(g);
  c.X12 = VecField3(g);
  c.X22 = VecField3(g);
  for (int k = 0; k < 3; ++k) {
    c.X11[k] = spectral::second_derivative(s.U[k], 1, 1);
    c.X12[k] = spectral::second_derivative(s.U[k], 1, 2);
    c.X22[k] = spectral::second_derivative(s.U[k], 2, 2);
  }
  c.N = VecField3(g);
  c.normN = ScalarField(g);
  double mn = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 nrm = cross(c.X1.at(i), c.X2.at(i));
    c.N.set(i, nrm);
    c.normN[i] = norm(nrm);
    mn = std::min(mn, c.normN[i]);
  }
  c.min_normN = mn;
  if (!(mn > kDegenerateNormal))
    throw DegenerateSurface("geometry: min |N| = " + std::to_string(mn) + " is degenerate");
  return c;
}

double chord_arc_gauge(const SurfaceState& s, int stride) {
  if (stride < 1) throw InvalidInput("chord_arc_gauge: stride must be positive");
  const ParamGrid& g = s.grid;
  const int n = g.n();
  const double h = g.h();
  const auto& U = s.U;
  std::vector<int> pts1, pts2;
  for (int i2 = 0; i2 < n; i2 += stride)
    for (int i1 = 0; i1 < n; i1 += stride) {
      pts1.push_back(i1);
      pts2.push_back(i2);
    }
  std::vector<double> best(pts1.size(), 0.0);
  std::vector<int> hit(pts1.size(), 0);
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < pts1.size(); ++p) {
    const int a1 = pts1[p], a2 = pts2[p];
    const std::size_t ia = g.index(a1, a2);
    double m = 0;
    for (int b2 = 0; b2 < n; ++b2) {
      const int d2 = g.wrap(a2 - b2);
      for (int b1 = 0; b1 < n; ++b1) {
        if (b1 == a1 && b2 == a2) continue;
        const int d1 = g.wrap(a1 - b1);
        const std::size_t ib = g.index(b1, b2);
        const double bx = h * d1, by = h * d2;
        const double dx = bx + (U[0][ia] - U[0][ib]);
        const double dy = by + (U[1][ia] - U[1][ib]);
        const double dz = U[2][ia] - U[2][ib];
        const double den = std::sqrt(dx * dx + dy * dy + dz * dz);
        if (den <= 1e-14) {
          hit[p] = 1;
          continue;
        }
        m = std::max(m, std::sqrt(bx * bx + by * by) / den);
      }
    }
    best[p] = m;
  }
  for (int x : hit)
    if (x) throw SelfIntersection("chord_arc_gauge: coincident images of distinct parameters");
  return *std::max_element(best.begin(), best.end());
}

IsothermalResidual isothermal_residual(const GeometryCache& c) {
  const ParamGrid& g = c.X1.grid();
  IsothermalResidual r{ScalarField(g), ScalarField(g)};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 a = c.X1.at(i), b = c.X2.at(i);
    r.f[i] = 0.5 * (dot(a, a) - dot(b, b));
    r.g[i] = dot(a, b);
  }
  return r;
}

IsothermalResidual isothermal_residual(const SurfaceState& s) {
  const ParamGrid& g = s.grid;
  VecField3 X1 = spectral::derivative(s.U, 1);
  VecField3 X2 = spectral::derivative(s.U, 2);
  IsothermalResidual r{ScalarField(g), ScalarField(g)};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 a = X1.at(i) + Vec3{1, 0, 0};
    const Vec3 b = X2.at(i) + Vec3{0, 1, 0};
    r.f[i] = 0.5 * (dot(a, a) - dot(b, b));
    r.g[i] = dot(a, b);
  }
  return r;
}

namespace {

double defect_of(const IsothermalResidual& r) {
  ScalarField q(r.f.grid);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = r.f[i] * r.f[i] + r.g[i] * r.g[i];
  return integrate(q);
}

ScalarField power_derivative(ScalarField f, int axis, int k) {
  for (int j = 0; j < k; ++j) f = spectral::derivative(f, axis);
  return f;
}

double sum_sq(const ScalarField& f) {
  ScalarField q(f.grid);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = f[i] * f[i];
  return integrate(q);
}

}  // namespace

double isothermal_defect(const SurfaceState& s) { return defect_of(isothermal_residual(s)); }

double sobolev_norm(const SurfaceState& s, int k) {
  const ParamGrid& g = s.grid;
  if (k < 1) throw InvalidInput("sobolev_norm: k must be >= 1");
  if (k > g.n() / 4)
    throw ResolutionError("sobolev_norm: k = " + std::to_string(k) + " exceeds n/4 for n = " +
                          std::to_string(g.n()));
  auto lp = [&](const ScalarField& f, double p) {
    ScalarField q(g);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = std::pow(std::abs(f[i]), p);
    return std::pow(integrate(q), 1.0 / p);
  };
  double value = lp(s.U[0], 3.0) + lp(s.U[1], 3.0) + lp(s.U[2], 2.0);
  for (int c = 0; c < 3; ++c) {
    value += sum_sq(spectral::derivative(s.U[c], 1)) + sum_sq(spectral::derivative(s.U[c], 2));
    value += sum_sq(power_derivative(s.U[c], 1, k)) + sum_sq(power_derivative(s.U[c], 2, k));
  }
  return value;
}

namespace {

// Deviation field of X o (id + psi).
VecField3 reparameterize(const SurfaceState& s, const ScalarField& psi1, const ScalarField& psi2) {
  const ParamGrid& g = s.grid;
  const int n = g.n();
  std::vector<double> a1(g.size()), a2(g.size());
  for (int i2 = 0; i2 < n; ++i2)
    for (int i1 = 0; i1 < n; ++i1) {
      const std::size_t i = g.index(i1, i2);
      a1[i] = g.alpha(i1) + psi1[i];
      a2[i] = g.alpha(i2) + psi2[i];
    }
  VecField3 out(g);
  for (int c = 0; c < 3; ++c) out[c].v = spectral::interpolate(s.U[c], a1, a2);
  for (std::size_t i = 0; i < g.size(); ++i) {
    out[0][i] += psi1[i];
    out[1][i] += psi2[i];
  }
  return out;
}

double min_jacobian(const ScalarField& psi1, const ScalarField& psi2) {
  const ScalarField p11 = spectral::derivative(psi1, 1), p12 = spectral::derivative(psi1, 2);
  const ScalarField p21 = spectral::derivative(psi2, 1), p22 = spectral::derivative(psi2, 2);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < psi1.size(); ++i)
    m = std::min(m, (1 + p11[i]) * (1 + p22[i]) - p12[i] * p21[i]);
  return m;
}

}  // namespace

IsothermalizeResult isothermalize(const SurfaceState& s, double tol, int max_iter) {
  const ParamGrid& g = s.grid;
  IsothermalizeResult res;
  res.state = s;
  res.J0 = res.J = isothermal_defect(s);
  if (res.J0 == 0 || max_iter <= 0) return res;

  ScalarField psi1(g), psi2(g);
  double tau = 0.5;
  SurfaceState current = s;
  double J = res.J0;
  int it = 0;
  while (it < max_iter && J > tol * res.J0) {
    ++it;
    // First variation of J under Y -> Y o (id + eta):
    //   dJ = int sum_k eta_k P_k + sum_{i,k} Q_ik d_i eta_k
    GeometryCache c = geometry(current);
    IsothermalResidual r = isothermal_residual(c);
    std::array<ScalarField, 2> grad{ScalarField(g), ScalarField(g)};
    std::array<std::array<ScalarField, 2>, 2> Q{};
    for (auto& row : Q)
      for (auto& q : row) q = ScalarField(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec3 Y1 = c.X1.at(i), Y2 = c.X2.at(i);
      const Vec3 w1 = r.f[i] * Y1 + r.g[i] * Y2;
      const Vec3 w2 = -r.f[i] * Y2 + r.g[i] * Y1;
      const Vec3 Y11 = c.X11.at(i), Y12 = c.X12.at(i), Y22 = c.X22.at(i);
      grad[0][i] = 2 * (dot(w1, Y11) + dot(w2, Y12));
      grad[1][i] = 2 * (dot(w1, Y12) + dot(w2, Y22));
      Q[0][0][i] = 2 * dot(w1, Y1);
      Q[0][1][i] = 2 * dot(w1, Y2);
      Q[1][0][i] = 2 * dot(w2, Y1);
      Q[1][1][i] = 2 * dot(w2, Y2);
    }
    for (int k = 0; k < 2; ++k)
      for (int a = 0; a < 2; ++a) {
        const ScalarField d = spectral::derivative(Q[a][k], a + 1);
        for (std::size_t i = 0; i < g.size(); ++i) grad[k][i] -= d[i];
      }
    // Preconditioned descent direction (multiplier 1/|xi|^2), mapped to an
    // increment of the accumulated displacement: dpsi = (I + grad psi) eta.
    const ScalarField eta1 = spectral::inv_neg_laplacian(grad[0]);
    const ScalarField eta2 = spectral::inv_neg_laplacian(grad[1]);
    const ScalarField p11 = spectral::derivative(psi1, 1), p12 = spectral::derivative(psi1, 2);
    const ScalarField p21 = spectral::derivative(psi2, 1), p22 = spectral::derivative(psi2, 2);
    ScalarField d1(g), d2(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      d1[i] = -((1 + p11[i]) * eta1[i] + p12[i] * eta2[i]);
      d2[i] = -(p21[i] * eta1[i] + (1 + p22[i]) * eta2[i]);
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      ScalarField t1(g), t2(g);
      for (std::size_t i = 0; i < g.size(); ++i) {
        t1[i] = psi1[i] + tau * d1[i];
        t2[i] = psi2[i] + tau * d2[i];
      }
      if (!(min_jacobian(t1, t2) > 0))
        throw IsothermalizeFailure("isothermalize: reparameterization lost injectivity");
      SurfaceState trial(g, reparameterize(s, t1, t2));
      const double Jt = isothermal_defect(trial);
      if (Jt < J) {
        psi1 = std::move(t1);
        psi2 = std::move(t2);
        current = std::move(trial);
        J = Jt;
        accepted = true;
        tau = std::min(1.0, tau * 1.25);
      } else {
        tau *= 0.5;
      }
    }
    if (!accepted) break;
  }
  res.state = std::move(current);
  res.J = J;
  res.iterations = it;
  return res;
}

}  // namespace muskat
