#include "muskat/validation.hpp"

#include <chrono>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "muskat/birkhoff_rott.hpp"
#include "muskat/initial_data.hpp"
#include "muskat/snapshot.hpp"
#include "muskat/spectral.hpp"
#include "muskat/tangential.hpp"

namespace muskat {

namespace {

using cd = std::complex<double>;
using Clock = std::chrono::steady_clock;

std::string sfmt(const char* f, ...) {
  char buf[4096];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

CriterionResult make_result(int id, const std::string& name) {
  CriterionResult r;
  r.id = id;
  r.name = name;
  return r;
}

// Closes out a result: the runtime budget is part of every criterion.
CriterionResult finish(CriterionResult r, bool ok, Clock::time_point t0) {
  r.seconds = since(t0);
  r.pass = ok && r.seconds <= r.budget;
  if (ok && !r.pass) r.detail += sfmt("; runtime %.1f s over budget", r.seconds);
  return r;
}

// Smooth periodic field with Fourier content |k1|, |k2| <= K, scaled to max 1.
ScalarField band_limited(const ParamGrid& g, int K, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  ScalarField f(g);
  const double w = kPi / g.L();
  for (int k2 = 0; k2 <= K; ++k2)
    for (int k1 = -K; k1 <= K; ++k1) {
      if (k2 == 0 && k1 <= 0) continue;
      const double a = nd(rng), b = nd(rng);
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

double max_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_diff(const VecField3& a, const VecField3& b) {
  return std::max({max_diff(a[0], b[0]), max_diff(a[1], b[1]), max_diff(a[2], b[2])});
}

// ---------------------------------------------------------------------------
// Independent oracles: direct DFTs, direct pair sums and direct convolutions.

struct Dft {
  int n;
  std::vector<cd> fwd;  // fwd[k * n + j] = exp(-i xi_k x_j)
  std::vector<int> freq;

  explicit Dft(const ParamGrid& g) : n(g.n()), fwd(static_cast<std::size_t>(n) * n), freq(n) {
    for (int k = 0; k < n; ++k) {
      freq[k] = k < n / 2 ? k : k - n;
      for (int j = 0; j < n; ++j)
        fwd[static_cast<std::size_t>(k) * n + j] = std::polar(1.0, -2 * kPi * freq[k] * j / n);
    }
  }

  // Multiplier m(c1, c2) on centered integer frequencies.
  template <class M>
  ScalarField apply(const ScalarField& f, M m) const {
    const std::size_t N = f.size();
    std::vector<cd> a(N), b(N);
    for (int j2 = 0; j2 < n; ++j2)
      for (int k1 = 0; k1 < n; ++k1) {
        cd s = 0;
        for (int j1 = 0; j1 < n; ++j1) s += fwd[k1 * n + j1] * f[j2 * n + j1];
        a[j2 * n + k1] = s;
      }
    for (int k2 = 0; k2 < n; ++k2)
      for (int k1 = 0; k1 < n; ++k1) {
        cd s = 0;
        for (int j2 = 0; j2 < n; ++j2) s += fwd[k2 * n + j2] * a[j2 * n + k1];
        b[k2 * n + k1] = s * m(freq[k1], freq[k2]);
      }
    for (int k2 = 0; k2 < n; ++k2)
      for (int j1 = 0; j1 < n; ++j1) {
        cd s = 0;
        for (int k1 = 0; k1 < n; ++k1) s += std::conj(fwd[k1 * n + j1]) * b[k2 * n + k1];
        a[k2 * n + j1] = s;
      }
    ScalarField out(f.grid);
    for (int j2 = 0; j2 < n; ++j2)
      for (int j1 = 0; j1 < n; ++j1) {
        cd s = 0;
        for (int k2 = 0; k2 < n; ++k2) s += std::conj(fwd[k2 * n + j2]) * a[k2 * n + j1];
        out[j2 * n + j1] = s.real() / static_cast<double>(N);
      }
    return out;
  }
};

struct OracleGeometry {
  VecField3 X[2];
  VecField3 XX[2][2];
  VecField3 N;
};

OracleGeometry oracle_geometry(const SurfaceState& s, const Dft& dft) {
  const ParamGrid& g = s.grid;
  const double w = kPi / g.L();
  const int nyq = -g.n() / 2;
  auto d1 = [&](int a) {
    return [=](int c1, int c2) {
      const int c = a == 0 ? c1 : c2;
      return c == nyq ? cd{0, 0} : cd{0, w * c};
    };
  };
  auto d2 = [&](int a, int b) {
    return [=](int c1, int c2) {
      const int ca = a == 0 ? c1 : c2, cb = b == 0 ? c1 : c2;
      return ca == nyq || cb == nyq ? cd{0, 0} : cd{-w * w * ca * cb, 0};
    };
  };
  OracleGeometry o;
  for (int a = 0; a < 2; ++a) {
    o.X[a] = VecField3(g);
    for (int k = 0; k < 3; ++k) o.X[a][k] = dft.apply(s.U[k], d1(a));
    for (double& x : o.X[a][a].v) x += 1;
    for (int b = 0; b < 2; ++b) {
      o.XX[a][b] = VecField3(g);
      for (int k = 0; k < 3; ++k) o.XX[a][b][k] = dft.apply(s.U[k], d2(a, b));
    }
  }
  o.N = VecField3(g);
  for (std::size_t i = 0; i < g.size(); ++i) o.N.set(i, cross(o.X[0].at(i), o.X[1].at(i)));
  return o;
}

struct OracleMoments {
  double m2[2][2];
  double m4[2][2][2][2];
};

// Same windowed moment-difference rule as the library, with the full circle
// and the full lattice disk summed explicitly.
OracleMoments oracle_moments(const Vec3& x1, const Vec3& x2, double h, double delta) {
  OracleMoments o{};
  const double g11 = dot(x1, x1), g12 = dot(x1, x2), g22 = dot(x2, x2);
  auto accumulate = [&](double x, double y, double w3, double sign) {
    const double v[2] = {x, y};
    const double q = g11 * x * x + 2 * g12 * x * y + g22 * y * y;
    const double k3 = sign * w3 / std::pow(q, 1.5), k5 = k3 / q;
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k) {
        o.m2[i][k] += v[i] * v[k] * k3;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) o.m4[a][b][i][k] += v[a] * v[b] * v[i] * v[k] * k5;
      }
  };
  const int M = 512;
  const double cw = delta * std::sqrt(kPi) / 2;
  for (int j = 0; j < M; ++j) {
    const double th = 2 * kPi * j / M;
    accumulate(std::cos(th), std::sin(th), cw * 2 * kPi / M, 1);
  }
  const double reach = 5.5 * delta;
  const int R = static_cast<int>(std::ceil(reach / h));
  for (int j2 = -R; j2 <= R; ++j2)
    for (int j1 = -R; j1 <= R; ++j1) {
      const double x = h * j1, y = h * j2, r2 = x * x + y * y;
      if ((j1 == 0 && j2 == 0) || r2 > reach * reach) continue;
      accumulate(x, y, h * h * std::exp(-r2 / (delta * delta)), -1);
    }
  return o;
}

ScalarField oracle_double_layer(const SurfaceState& s, const OracleGeometry& o, const ScalarField& Om) {
  const ParamGrid& g = s.grid;
  const int n = g.n();
  const double h = g.h(), delta = g.L() / 8;
  ScalarField out(g);
  for (int t2 = 0; t2 < n; ++t2)
    for (int t1 = 0; t1 < n; ++t1) {
      const std::size_t t = g.index(t1, t2);
      double sum = 0;
      for (int s2 = 0; s2 < n; ++s2)
        for (int s1 = 0; s1 < n; ++s1) {
          if (s1 == t1 && s2 == t2) continue;
          const std::size_t k = g.index(s1, s2);
          const Vec3 u = Vec3{h * g.wrap(t1 - s1), h * g.wrap(t2 - s2), 0} + s.U.at(t) - s.U.at(k);
          sum += dot(u, o.N.at(k)) * Om[k] / std::pow(dot(u, u), 1.5);
        }
      const OracleMoments m = oracle_moments(o.X[0].at(t), o.X[1].at(t), h, delta);
      double diag = 0;
      for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) diag += m.m2[i][k] * dot(o.XX[i][k].at(t), o.N.at(t));
      out[t] = h * h * sum / (2 * kPi) + Om[t] * diag / (4 * kPi);
    }
  return out;
}

VecField3 oracle_br(const SurfaceState& s, const OracleGeometry& o, const VecField3& w, const Dft& dft,
                    int ring) {
  const ParamGrid& g = s.grid;
  const int n = g.n();
  const double h = g.h(), delta = g.L() / 8, wn = kPi / g.L();
  VecField3 dw[2] = {VecField3(g), VecField3(g)};
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k < 3; ++k)
      dw[a][k] = dft.apply(w[k], [&](int c1, int c2) {
        const int c = a == 0 ? c1 : c2;
        return c == -n / 2 ? cd{0, 0} : cd{0, wn * c};
      });
  VecField3 out(g);
  for (int t2 = 0; t2 < n; ++t2)
    for (int t1 = 0; t1 < n; ++t1) {
      const std::size_t t = g.index(t1, t2);
      Vec3 sum;
      for (int s2 = 0; s2 < n; ++s2)
        for (int s1 = 0; s1 < n; ++s1) {
          if (s1 == t1 && s2 == t2) continue;
          const std::size_t k = g.index(s1, s2);
          const Vec3 u = Vec3{h * g.wrap(t1 - s1), h * g.wrap(t2 - s2), 0} + s.U.at(t) - s.U.at(k);
          sum += cross(u * (1 / std::pow(dot(u, u), 1.5)), w.at(k));
        }
      const Vec3 A = o.X[0].at(t), B = o.X[1].at(t);
      for (int d2 = -ring; d2 <= ring; ++d2)
        for (int d1 = -ring; d1 <= ring; ++d1) {
          if ((d1 == 0 && d2 == 0) || d1 * d1 + d2 * d2 > ring * ring) continue;
          const Vec3 b{h * d1, h * d2, 0};
          const Vec3 p = h * d1 * A + h * d2 * B;
          sum -= cross(p * (1 / std::pow(dot(p, p), 1.5)) - b * (1 / std::pow(dot(b, b), 1.5)), w.at(t));
        }
      sum *= h * h;
      const OracleMoments m = oracle_moments(A, B, h, delta);
      const Vec3 X[2] = {A, B};
      Vec3 T;
      for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) {
          T -= 0.5 * m.m2[i][k] * o.XX[i][k].at(t);
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) T += 1.5 * m.m4[a][b][i][k] * dot(X[a], o.XX[i][k].at(t)) * X[b];
        }
      sum += cross(T, w.at(t));
      for (int a = 0; a < 2; ++a)
        for (int k = 0; k < 2; ++k) sum -= m.m2[a][k] * cross(X[a], dw[k].at(t));
      out.set(t, -1.0 / (4 * kPi) * sum);
    }
  return out;
}

// grad Delta^{-1} as a direct circular convolution with its discrete kernel.
ScalarField oracle_ilg(const ScalarField& f, int axis, const Dft& dft) {
  const ParamGrid& g = f.grid;
  const int n = g.n();
  const double wn = kPi / g.L();
  ScalarField delta0(g);
  delta0[0] = 1;
  const ScalarField K = dft.apply(delta0, [&](int c1, int c2) {
    const int c = axis == 1 ? c1 : c2;
    if ((c1 == 0 && c2 == 0) || c == -n / 2) return cd{0, 0};
    return cd{0, -wn * c / (wn * wn * (c1 * c1 + c2 * c2))};
  });
  ScalarField out(g);
  for (int t2 = 0; t2 < n; ++t2)
    for (int t1 = 0; t1 < n; ++t1) {
      double s = 0;
      for (int s2 = 0; s2 < n; ++s2)
        for (int s1 = 0; s1 < n; ++s1)
          s += K[g.index(((t1 - s1) % n + n) % n, ((t2 - s2) % n + n) % n)] * f[g.index(s1, s2)];
      out[g.index(t1, t2)] = s;
    }
  return out;
}

TangentialFields oracle_tangential(const OracleGeometry& o, const VecField3& br, const Dft& dft) {
  const ParamGrid& g = br.grid();
  const int n = g.n();
  const double wn = kPi / g.L();
  VecField3 d[2] = {VecField3(g), VecField3(g)};
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k < 3; ++k)
      d[a][k] = dft.apply(br[k], [&](int c1, int c2) {
        const int c = a == 0 ? c1 : c2;
        return c == -n / 2 ? cd{0, 0} : cd{0, wn * c};
      });
  ScalarField a(g), b(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 X1 = o.X[0].at(i), X2 = o.X[1].at(i);
    a[i] = (dot(d[1].at(i), X2) - dot(d[0].at(i), X1)) / dot(X2, X2);
    b[i] = (dot(d[0].at(i), X2) + dot(d[1].at(i), X1)) / dot(X1, X1);
  }
  const ScalarField a1 = oracle_ilg(a, 1, dft), a2 = oracle_ilg(a, 2, dft);
  const ScalarField b1 = oracle_ilg(b, 1, dft), b2 = oracle_ilg(b, 2, dft);
  TangentialFields t{ScalarField(g), ScalarField(g)};
  for (std::size_t i = 0; i < g.size(); ++i) {
    t.C1[i] = a1[i] - b2[i];
    t.C2[i] = -a2[i] - b1[i];
  }
  return t;
}

// ---------------------------------------------------------------------------

StepConfig default_step(QuadratureConfig::FarField ff = QuadratureConfig::FarField::box) {
  StepConfig c;
  c.quad.far_field = ff;
  return c;
}

// Darcy residual fields d_j Omega + 2 A_mu BR . X_j + 2 A_rho d_j X3.
std::array<ScalarField, 2> darcy_fields(const Evaluation& e, const FluidParams& p, const ScalarField& Omega) {
  const GeometryCache& c = e.cache;
  std::array<ScalarField, 2> r;
  const VecField3* X[2] = {&c.X1, &c.X2};
  for (int j = 0; j < 2; ++j) {
    r[j] = spectral::derivative(Omega, j + 1);
    for (std::size_t i = 0; i < r[j].size(); ++i)
      r[j][i] += 2 * p.A_mu() * dot(e.br.at(i), X[j]->at(i)) + 2 * p.A_rho() * (*X[j])[2][i];
  }
  return r;
}

// Residual field restricted to the nodes of the coarse grid (every `stride`-th node).
ScalarField restrict_to(const ScalarField& f, const ParamGrid& coarse) {
  const int stride = f.grid.n() / coarse.n();
  ScalarField out(coarse);
  for (int i2 = 0; i2 < coarse.n(); ++i2)
    for (int i1 = 0; i1 < coarse.n(); ++i1)
      out[coarse.index(i1, i2)] = f[f.grid.index(i1 * stride, i2 * stride)];
  return out;
}

struct ModeFit {
  double rate = 0;
  double final_amp = 0;
  int points = 0;
  std::string stop;
  MonitorReport monitor;
};

// Runs a seeded cosine mode and fits log |a(t)| with a(t) the cos(k alpha_1)
// coefficient of U3.
ModeFit fit_mode(int n, double L, int m, const FluidParams& fluid, bool guarded, double t_end, int steps) {
  const ParamGrid g(n, L);
  RunConfig rc;
  rc.step = default_step(QuadratureConfig::FarField::periodic);
  rc.step.fluid = fluid;
  rc.step.guarded = guarded;
  rc.dt_policy = DtPolicy::fixed;
  rc.t_end = t_end;
  rc.dt = t_end / steps;
  const double k = m * kPi / L;
  std::vector<double> ts, ys;
  RunObserver obs;
  obs.on_snapshot = [&](const SurfaceState& s, double t, int) {
    double a = 0;
    for (int i2 = 0; i2 < n; ++i2)
      for (int i1 = 0; i1 < n; ++i1) a += s.U[2][g.index(i1, i2)] * std::cos(k * g.alpha(i1));
    a *= 2.0 / (static_cast<double>(n) * n);
    if (!ts.empty() && ts.back() == t) return;
    ts.push_back(t);
    ys.push_back(std::log(std::abs(a)));
  };
  const RunResult r = run(rc, cosine_mode(g, m, 0, 1e-4), obs);
  ModeFit f;
  f.stop = r.stop_reason;
  f.monitor = r.monitor;
  f.points = static_cast<int>(ts.size());
  if (ts.size() < 2) return f;
  double mt = 0, my = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) { mt += ts[i]; my += ys[i]; }
  mt /= ts.size();
  my /= ts.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    sxy += (ts[i] - mt) * (ys[i] - my);
    sxx += (ts[i] - mt) * (ts[i] - mt);
  }
  f.rate = sxy / sxx;
  f.final_amp = std::exp(ys.back());
  return f;
}

}  // namespace

CriterionResult criterion_flat_equilibrium(ValidationLevel level) {
  const auto t0 = Clock::now();
  CriterionResult r = make_result(1, "flat-equilibrium");
  r.budget = 30;
  const int n = level == ValidationLevel::full ? 64 : 32;
  RunConfig rc;
  rc.step = default_step();
  rc.dt_policy = DtPolicy::fixed;
  rc.dt = 0.01;
  rc.t_end = 1.0;
  rc.max_steps = 100;
  const RunResult res = run(rc, SurfaceState::flat(ParamGrid(n, 6.0)));
  double dE = 0, xt = 0;
  for (const auto& rec : res.records) {
    dE = std::max(dE, std::abs(rec.energy - res.records.front().energy));
    xt = std::max(xt, rec.max_xt);
  }
  const double u = max_abs(res.final_state.U);
  const bool ok = res.steps == 100 && u <= 1e-12 && dE <= 1e-12 && xt <= 1e-12;
  r.detail = sfmt("n=%d steps=%d max|U|=%.3g max|E-E0|=%.3g max|X_t|=%.3g", n, res.steps, u, dE, xt);
  return finish(r, ok, t0);
}

CriterionResult criterion_spectral_identities(ValidationLevel level) {
  const auto t0 = Clock::now();
  CriterionResult r = make_result(2, "spectral-identities");
  r.budget = 5;
  const int n = level == ValidationLevel::full ? 128 : 32;
  const ParamGrid g(n, 6.0);
  std::mt19937_64 rng(20240521);
  double e_id = 0, e_pos = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 20; ++trial) {
    const ScalarField th = band_limited(g, 6, rng);
    const ScalarField lam = spectral::lambda_op(th);
    const ScalarField a = spectral::riesz(spectral::derivative(th, 1), 1);
    const ScalarField b = spectral::riesz(spectral::derivative(th, 2), 2);
    ScalarField sq(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      e_id = std::max(e_id, std::abs(lam[i] - a[i] - b[i]));
      sq[i] = th[i] * th[i];
    }
    const ScalarField lsq = spectral::lambda_op(sq);
    for (std::size_t i = 0; i < g.size(); ++i) e_pos = std::min(e_pos, th[i] * lam[i] - 0.5 * lsq[i]);
  }
  r.detail = sfmt("n=%d max|Lambda-R.grad|=%.3g min(thLth-Lth^2/2)=%.3g", n, e_id, e_pos);
  return finish(r, e_id <= 1e-10 && e_pos >= -1e-8, t0);
}

CriterionResult criterion_operator_oracles(ValidationLevel) {
  const auto t0 = Clock::now();
  CriterionResult r = make_result(3, "operator-oracles");
  r.budget = 10;
  const ParamGrid g(16, 6.0);
  const SurfaceState s = gaussian_bump(g, 0.3, 1.0);
  const GeometryCache c = geometry(s);
  const QuadratureContext q(s, c);
  const Dft dft(g);
  const OracleGeometry o = oracle_geometry(s, dft);
  std::mt19937_64 rng(77);
  const ScalarField Om = band_limited(g, 3, rng);
  const VecField3 w = vorticity_density(c, Om);
  const VecField3 br_in(band_limited(g, 3, rng), band_limited(g, 3, rng), band_limited(g, 3, rng));

  auto rel = [](double err, double ref) { return err / std::max(1.0, ref); };
  const ScalarField D = double_layer_apply(q, Om);
  const ScalarField Do = oracle_double_layer(s, o, Om);
  const double eD = rel(max_diff(D, Do), max_abs(Do));
  const VecField3 B = br_velocity(q, w);
  const VecField3 Bo = oracle_br(s, o, w, dft, q.config().ring);
  const double eB = rel(max_diff(B, Bo), max_abs(Bo));
  const TangentialFields T = tangential_coeffs(c, br_in);
  const TangentialFields To = oracle_tangential(o, br_in, dft);
  const double eC = rel(std::max(max_diff(T.C1, To.C1), max_diff(T.C2, To.C2)),
                        std::max(max_abs(To.C1), max_abs(To.C2)));
  r.detail = sfmt("n=16 rel err D=%.3g BR=%.3g C=%.3g (tol 1e-12)", eD, eB, eC);
  return finish(r, eD <= 1e-12 && eB <= 1e-12 && eC <= 1e-12, t0);
}

CriterionResult criterion_darcy_consistency(ValidationLevel level) {
  const auto t0 = Clock::now();
  CriterionResult r = make_result(4, "darcy-consistency");
  r.budget = 600;
  if (level == ValidationLevel::fast) {
    r.skipped = r.pass = true;
    r.detail = "full level only (n up to 128)";
    return r;
  }
  const StepConfig cfg = default_step();
  const int ns[3] = {32, 64, 128};
  std::array<ScalarField, 2> coarse[3];
  double sup[3][2];
  const ParamGrid g32(32, 6.0);
  Evaluation fine;
  for (int l = 0; l < 3; ++l) {
    const SurfaceState s = gaussian_bump(ParamGrid(ns[l], 6.0), 0.1, 1.0);
    Evaluation e = evaluate(s, cfg);
    const auto f = darcy_fields(e, cfg.fluid, e.omega.Omega);
    for (int j = 0; j < 2; ++j) {
      sup[l][j] = max_abs(f[j]);
      coarse[l][j] = restrict_to(f[j], g32);
    }
    if (l == 2) fine = std::move(e);
  }
  double order[2];
  for (int j = 0; j < 2; ++j)
    order[j] = std::log2(max_diff(coarse[0][j], coarse[1][j]) / max_diff(coarse[1][j], coarse[2][j]));
  // Negative control: an unrelated smooth Omega with its own vorticity and BR.
  const ParamGrid g128(128, 6.0);
  const SurfaceState s = gaussian_bump(g128, 0.1, 1.0);
  std::mt19937_64 rng(4242);
  Evaluation bad = fine;
  bad.omega.Omega = band_limited(g128, 4, rng);
  const QuadratureContext q(s, bad.cache, cfg.quad);
  bad.br = br_velocity(q, vorticity_density(bad.cache, bad.omega.Omega));
  const auto fb = darcy_fields(bad, cfg.fluid, bad.omega.Omega);
  const double conv = std::max(sup[2][0], sup[2][1]);
  const double neg = std::max(max_abs(fb[0]), max_abs(fb[1]));
  r.detail = sfmt("sup r1 = %.3g/%.3g/%.3g, r2 = %.3g/%.3g/%.3g (n=32/64/128); self-convergence order "
                  "r1=%.2f r2=%.2f; random Omega %.3g = %.3gx converged",
                  sup[0][0], sup[1][0], sup[2][0], sup[0][1], sup[1][1], sup[2][1], order[0], order[1], neg,
                  neg / conv);
  return finish(r, order[0] >= 1.5 && order[1] >= 1.5 && neg >= 1e3 * conv, t0);
}

CriterionResult criterion_dispersion(ValidationLevel level, std::vector<MonitorReport>* monitors) {
  const auto t0 = Clock::now();
  CriterionResult r = make_result(5, "dispersion");
  r.budget = 300;
  (void)level;
  const int n = 32;
  const double L = 6.0;
  FluidParams stable;
  FluidParams swapped;
  swapped.rho1 = stable.rho2;
  swapped.rho2 = stable.rho1;
  bool ok = true;
  std::string d;
  for (int m = 1; m <= 3; ++m) {
    const double lam = -stable.A_rho() * m * kPi / L;
    const ModeFit a = fit_mode(n, L, m, stable, true, 1.0 / std::abs(lam), 25);
    const double ea = std::abs(a.rate - lam) / std::abs(lam);
    // Growth from 1e-4 to 1e-3 stays in the linear regime.
    const ModeFit b = fit_mode(n, L, m, swapped, false, std::log(10.0) / std::abs(lam), 25);
    const double eb = std::abs(b.rate + lam) / std::abs(lam);
    ok = ok && a.stop == "t_end" && b.stop == "t_end" && ea <= 0.02 && eb <= 0.05 && b.final_amp <= 1.1e-3;
    d += sfmt("%sk=%dpi/L: lambda=%.5f decay %.5f (%.2g) growth %.5f (%.2g)", m > 1 ? "; " : "", m, lam,
              a.rate, ea, b.rate, eb);
    if (monitors) monitors->push_back(a.monitor);
  }
  r.detail = d;
  return finish(r, ok, t0);
}

CriterionResult criterion_isothermality(ValidationLevel level, std::vector<MonitorReport>* monitors) {
  const auto t0 = Clock::now();
  CriterionResult r = make_result(6, "isothermality");
  r.budget = 600;
  Config c;
  c.n = level == ValidationLevel::full ? 64 : 32;
  c.L = 6.0;
  c.init.kind = "gaussian";
  c.init.amplitude = 0.05;
  c.init.width = 1.0;
  c.init.isothermalize = true;
  c.run.t_end = 0.5;
  InitialData init;
  const RunResult res = run_from_config(c, {}, &init);
  const double J0 = init.J;
  double Jmax = 0, Emax = 0;
  for (const auto& rec : res.records) {
    Jmax = std::max(Jmax, rec.J);
    Emax = std::max(Emax, rec.energy);
  }
  const double E0 = res.records.empty() ? 0 : res.records.front().energy;
  const bool ok = res.stop_reason == "t_end" && Jmax <= 10 * J0 + 1e-10 && std::isfinite(Emax) && Emax <= 2 * E0;
  r.detail = sfmt("n=%d t=%.3g steps=%d J before/after isothermalize %.3g/%.3g, max J(t)=%.3g (bound %.3g); "
                  "max E/E0=%.6f",
                  c.n, res.t, res.steps, init.J0, J0, Jmax, 10 * J0 + 1e-10, Emax / E0);
  if (!ok && res.stop_reason != "t_end") r.detail += "; stopped: " + res.stop_reason + " " + res.message;
  if (monitors) monitors->push_back(res.monitor);
  return finish(r, ok, t0);
}

CriterionResult criterion_fredholm(ValidationLevel level) {
  const auto t0 = Clock::now();
  CriterionResult r = make_result(7, "fredholm");
  r.budget = 120;
  const int n = level == ValidationLevel::full ? 64 : 32;
  const ParamGrid g(n, 6.0);
  const FluidParams p;
  bool ok = true;
  std::string d = sfmt("n=%d", n);
  for (double amp : {0.1, 0.3, 0.5}) {
    const SurfaceState s = gaussian_bump(g, amp, 1.0);
    const GeometryCache c = geometry(s);
    const QuadratureContext q(s, c);
    const SpectralRadius sr = spectral_radius_estimate(q, 200);
    SolverConfig kry, pic;
    kry.method = SolverConfig::Method::gmres;
    pic.method = SolverConfig::Method::picard;
    pic.max_iter = 500;
    const OmegaSolveReport a = solve_omega(q, p, kry);
    const OmegaSolveReport b = solve_omega(q, p, pic);
    const double diff = max_diff(a.Omega, b.Omega) / max_abs(a.Omega);
    ok = ok && sr.estimate < 1 && diff <= 10 * kry.tol;
    d += sfmt("; A=%.1f rho=%.4f (%d it) gmres %d/picard %d applies, |dOmega|=%.2g", amp, sr.estimate,
              sr.iterations, a.iterations, b.iterations, diff);
  }
  r.detail = d;
  return finish(r, ok, t0);
}

CriterionResult criterion_gauge_monitor(ValidationLevel, const std::vector<MonitorReport>& stable) {
  const auto t0 = Clock::now();
  CriterionResult r = make_result(8, "gauge-monitor");
  r.budget = 60;
  // A short stable bump run of its own; its history also feeds the negative control.
  RunConfig rc;
  rc.step = default_step();
  rc.dt_policy = DtPolicy::fixed;
  rc.dt = 0.02;
  rc.t_end = 0.2;
  const RunResult res = run(rc, gaussian_bump(ParamGrid(32, 6.0), 0.1, 1.0));
  std::vector<MonitorReport> reports = stable;
  reports.push_back(res.monitor);
  int violations = 0, intervals = 0, invalid = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& m : reports) {
    if (!m.valid) ++invalid;
    violations += m.violations;
    intervals += static_cast<int>(m.gauge.size());
    for (const auto& iv : m.gauge) worst = std::min(worst, iv.margin);
  }
  // Corrupted history: the gauge at each interval start is lowered (so F jumps
  // up across the interval) while |grad X_t| is shrunk.
  std::vector<DiagnosticsRecord> bad = res.records;
  for (std::size_t k = 0; k < bad.size(); ++k) {
    if (k % 2 == 0) bad[k].gauge *= 0.5;
    bad[k].grad_xt *= 1e-3;
  }
  const MonitorReport neg = monitor_inequalities(bad);
  const bool ok = violations == 0 && invalid == 0 && neg.valid && neg.violations > 0;
  r.detail = sfmt("%zu stable runs, %d intervals, %d violations, min margin %.3g; corrupted history "
                  "flagged on %d/%zu intervals",
                  reports.size(), intervals, violations, worst, neg.violations, neg.gauge.size());
  return finish(r, ok, t0);
}

CriterionResult criterion_determinism(ValidationLevel) {
  const auto t0 = Clock::now();
  CriterionResult r = make_result(9, "determinism");
  r.budget = 60;
  Config c;
  c.n = 32;
  c.L = 6.0;
  c.init.kind = "gaussian";
  c.init.amplitude = 0.1;
  c.run.dt_policy = DtPolicy::fixed;
  c.run.dt = 0.05;
  c.run.t_end = 0.2;
  c.run.cadence = 1;
  struct Outputs {
    std::string csv, snaps;
  };
  auto go = [](const Config& cfg) {
    Outputs o;
    o.csv = csv_header();
    RunObserver obs;
    obs.on_record = [&](const DiagnosticsRecord& rec) { o.csv += csv_row(rec); };
    obs.on_snapshot = [&](const SurfaceState& s, double t, int) { o.snaps += encode_snapshot(s, t); };
    run_from_config(cfg, obs);
    return o;
  };
  const Outputs a = go(c);
  const std::string text = format_config(c);
  const Config c2 = parse_config(text);
  const bool cfg_rt = format_config(c2) == text;
  const Outputs b = go(c2);
  const bool repeat = a.csv == b.csv && a.snaps == b.snaps;

  const SurfaceState s = gaussian_bump(ParamGrid(32, 6.0), 0.1, 1.0);
  const std::string bytes = encode_snapshot(s, 0.125);
  const Snapshot back = decode_snapshot(bytes);
  bool snap_rt = encode_snapshot(back.state, back.t) == bytes;
  const auto path = std::filesystem::temp_directory_path() / ("muskat3d_rt_" + std::to_string(::getpid()) + ".bin");
  save_snapshot(path.string(), s, 0.125);
  const Snapshot loaded = load_snapshot(path.string());
  save_snapshot(path.string(), loaded.state, loaded.t);
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  f.close();
  std::filesystem::remove(path);
  snap_rt = snap_rt && ss.str() == bytes;
  r.detail = sfmt("repeat run identical: %s (%zu CSV bytes, %zu snapshot bytes); config round-trip: %s; "
                  "snapshot round-trip: %s",
                  repeat ? "yes" : "no", a.csv.size(), a.snaps.size(), cfg_rt ? "yes" : "no",
                  snap_rt ? "yes" : "no");
  return finish(r, repeat && cfg_rt && snap_rt && !a.snaps.empty(), t0);
}

std::vector<CriterionResult> run_validation(ValidationLevel level,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<CriterionResult> out;
  auto guarded = [&](int id, const char* name, auto&& fn) {
    CriterionResult r;
    const auto t0 = Clock::now();
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = make_result(id, name);
      r.detail = std::string("error: ") + e.what();
      r.seconds = since(t0);
    }
    if (on_result) on_result(r);
    out.push_back(r);
  };
  std::vector<MonitorReport> stable;
  guarded(1, "flat-equilibrium", [&] { return criterion_flat_equilibrium(level); });
  guarded(2, "spectral-identities", [&] { return criterion_spectral_identities(level); });
  guarded(3, "operator-oracles", [&] { return criterion_operator_oracles(level); });
  guarded(4, "darcy-consistency", [&] { return criterion_darcy_consistency(level); });
  guarded(5, "dispersion", [&] { return criterion_dispersion(level, &stable); });
  guarded(6, "isothermality", [&] { return criterion_isothermality(level, &stable); });
  guarded(7, "fredholm", [&] { return criterion_fredholm(level); });
  guarded(8, "gauge-monitor", [&] { return criterion_gauge_monitor(level, stable); });
  guarded(9, "determinism", [&] { return criterion_determinism(level); });
  return out;
}

std::string format_result(const CriterionResult& r) {
  const char* tag = r.skipped ? "SKIP" : r.pass ? "PASS" : "FAIL";
  if (r.skipped) return sfmt("[%s] %d %s: %s", tag, r.id, r.name.c_str(), r.detail.c_str());
  return sfmt("[%s] %d %s: %s (%.1f s, budget %.0f s)", tag, r.id, r.name.c_str(), r.detail.c_str(), r.seconds,
              r.budget);
}

}  // namespace muskat
