#include "muskat/layerpot.hpp"

#include <algorithm>
#include <random>

#include "muskat/spectral.hpp"

namespace muskat {

void FluidParams::validate() const {
  if (!(mu1 > 0) || !std::isfinite(mu1)) throw ConfigError("fluid.mu1", "must be positive and finite");
  if (!(mu2 > 0) || !std::isfinite(mu2)) throw ConfigError("fluid.mu2", "must be positive and finite");
  if (!std::isfinite(rho1)) throw ConfigError("fluid.rho1", "must be finite");
  if (!std::isfinite(rho2)) throw ConfigError("fluid.rho2", "must be finite");
}

ScalarField double_layer_apply(const QuadratureContext& q, const ScalarField& omega) {
  const GeometryCache& c = q.cache();
  if (!(omega.grid == q.grid())) throw InvalidInput("double layer: density on a different grid");
  if (!all_finite(omega)) throw InvalidInput("double layer: non-finite density");
  VecField3 psi(q.grid());
  for (int k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < omega.size(); ++i) psi[k][i] = c.N[k][i] * omega[i];
  ScalarField out = dl_pair_sum(q, psi);
  const ScalarField& diag = q.dl_diagonal();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] / (2 * kPi) + diag[i] * omega[i];
  return out;
}

ScalarField double_layer_apply(const SurfaceState& s, const GeometryCache& c, const ScalarField& omega) {
  return double_layer_apply(QuadratureContext(s, c), omega);
}

namespace {

struct Problem {
  const QuadratureContext& q;
  double amu;
  ScalarField b;   // -2 A_rho X3
  double scale;    // max|b|, or 1 when b = 0
  int applies = 0;

  Problem(const QuadratureContext& q_, const FluidParams& p) : q(q_), amu(p.A_mu()), b(q_.grid()) {
    const ScalarField& x3 = q.state().U[2];
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = -2 * p.A_rho() * x3[i];
    const double m = max_abs(b);
    scale = m > 0 ? m : 1.0;
  }

  // A x = x - A_mu D x; also returns D x through `dx`.
  ScalarField apply(const ScalarField& x, ScalarField* dx = nullptr) {
    // D(0) = 0 exactly; skip the pair sum for a vanishing density.
    const bool trivial = amu == 0 || max_abs(x) == 0;
    ScalarField d = trivial ? ScalarField(x.grid) : double_layer_apply(q, x);
    if (!trivial) ++applies;
    ScalarField out(x.grid);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - amu * d[i];
    if (dx) *dx = std::move(d);
    return out;
  }

  double residual_of(const ScalarField& ax) const {
    double m = 0;
    for (std::size_t i = 0; i < ax.size(); ++i) m = std::max(m, std::abs(ax[i] - b[i]));
    return m / scale;
  }
};

double dot2(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> p(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) p[i] = a[i] * b[i];
  return pairwise_sum(p);
}

struct Attempt {
  ScalarField x;
  double residual;
  bool converged;
};

Attempt gmres(Problem& P, ScalarField x, const SolverConfig& cfg) {
  const std::size_t N = x.size();
  const int m = std::max(1, cfg.restart);
  // 2-norm bound that guarantees the max-norm target.
  const double inner = 0.5 * cfg.tol * P.scale;
  Attempt best{x, std::numeric_limits<double>::infinity(), false};
  for (int cycle = 0;; ++cycle) {
    ScalarField ax = P.apply(x);
    const double res = P.residual_of(ax);
    if (res < best.residual) best = {x, res, false};
    if (res <= cfg.tol) return {x, res, true};
    if (P.applies >= cfg.max_iter || cycle >= cfg.max_iter) return best;

    std::vector<std::vector<double>> V;
    std::vector<double> r(N);
    for (std::size_t i = 0; i < N; ++i) r[i] = P.b[i] - ax[i];
    const double beta = std::sqrt(dot2(r, r));
    if (beta == 0) return {x, res, res <= cfg.tol};
    for (double& v : r) v /= beta;
    V.push_back(std::move(r));
    std::vector<std::vector<double>> H(m + 1, std::vector<double>(m, 0.0));
    std::vector<double> cs(m), sn(m), g(m + 1, 0.0);
    g[0] = beta;
    int k = 0;
    for (; k < m && P.applies < cfg.max_iter; ++k) {
      ScalarField w = P.apply(ScalarField(x.grid, V[k]));
      for (int j = 0; j <= k; ++j) {
        H[j][k] = dot2(w.v, V[j]);
        for (std::size_t i = 0; i < N; ++i) w[i] -= H[j][k] * V[j][i];
      }
      H[k + 1][k] = std::sqrt(dot2(w.v, w.v));
      for (int j = 0; j < k; ++j) {
        const double t = cs[j] * H[j][k] + sn[j] * H[j + 1][k];
        H[j + 1][k] = -sn[j] * H[j][k] + cs[j] * H[j + 1][k];
        H[j][k] = t;
      }
      const double den = std::hypot(H[k][k], H[k + 1][k]);
      cs[k] = den == 0 ? 1 : H[k][k] / den;
      sn[k] = den == 0 ? 0 : H[k + 1][k] / den;
      const double hk1 = H[k + 1][k];
      H[k][k] = den;
      H[k + 1][k] = 0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      if (std::abs(g[k + 1]) <= inner || hk1 == 0) { ++k; break; }
      for (double& v : w.v) v /= hk1;
      V.push_back(std::move(w.v));
    }
    // Back substitution for the k-dimensional least-squares update.
    std::vector<double> y(k, 0.0);
    for (int j = k - 1; j >= 0; --j) {
      double s = g[j];
      for (int l = j + 1; l < k; ++l) s -= H[j][l] * y[l];
      y[j] = H[j][j] == 0 ? 0 : s / H[j][j];
    }
    for (int j = 0; j < k; ++j)
      for (std::size_t i = 0; i < N; ++i) x[i] += y[j] * V[j][i];
  }
}

Attempt picard(Problem& P, ScalarField x, const SolverConfig& cfg, int budget) {
  Attempt best{x, std::numeric_limits<double>::infinity(), false};
  double first = -1;
  for (int it = 0; it <= budget; ++it) {
    ScalarField dx;
    ScalarField ax = P.apply(x, &dx);
    const double res = P.residual_of(ax);
    if (res < best.residual) best = {x, res, false};
    if (res <= cfg.tol) return {x, res, true};
    if (first < 0) first = res;
    if (it == budget || !std::isfinite(res) || res > 1e3 * first) break;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = P.amu * dx[i] + P.b[i];
  }
  return best;
}

}  // namespace

double omega_residual(const QuadratureContext& q, const FluidParams& p, const ScalarField& omega) {
  Problem P(q, p);
  return P.residual_of(P.apply(omega));
}

OmegaSolveReport solve_omega(const QuadratureContext& q, const FluidParams& p, const SolverConfig& cfg,
                             const ScalarField* guess) {
  if (!(cfg.tol > 0)) throw ConfigError("solver.tol", "must be positive");
  if (cfg.max_iter < 1) throw ConfigError("solver.max_iter", "must be >= 1");
  if (cfg.restart < 1) throw ConfigError("solver.restart", "must be >= 1");
  Problem P(q, p);
  OmegaSolveReport rep;
  if (P.amu == 0) {
    rep.Omega = P.b;
    rep.residual = 0;
    rep.method = "direct";
    return rep;
  }
  ScalarField x0 = P.b;
  if (guess) {
    if (!(guess->grid == q.grid()) || !all_finite(*guess))
      throw InvalidInput("solve_omega: invalid initial guess");
    x0 = *guess;
  }
  Attempt a{x0, std::numeric_limits<double>::infinity(), false};
  rep.method = "gmres";
  if (cfg.method != SolverConfig::Method::picard) a = gmres(P, x0, cfg);
  if (!a.converged && cfg.method != SolverConfig::Method::gmres) {
    const ScalarField start = std::isfinite(a.residual) ? a.x : x0;
    Attempt b = picard(P, start, cfg, cfg.max_iter);
    rep.method = "picard";
    if (b.converged || b.residual < a.residual) a = b;
  }
  rep.iterations = P.applies;
  if (!a.converged)
    throw NonConvergence("solve_omega: residual " + std::to_string(a.residual) + " above tolerance after " +
                             std::to_string(P.applies) + " operator applications",
                         a.residual);
  rep.Omega = std::move(a.x);
  rep.residual = a.residual;
  return rep;
}

VecField3 vorticity_density(const GeometryCache& c, const ScalarField& Omega) {
  const ScalarField d1 = spectral::derivative(Omega, 1);
  const ScalarField d2 = spectral::derivative(Omega, 2);
  VecField3 w(Omega.grid);
  for (int k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < Omega.size(); ++i) w[k][i] = d2[i] * c.X1[k][i] - d1[i] * c.X2[k][i];
  return w;
}

DarcyResidual darcy_residual(const GeometryCache& c, const FluidParams& p, const ScalarField& Omega,
                             const VecField3& br) {
  const ScalarField dO[2] = {spectral::derivative(Omega, 1), spectral::derivative(Omega, 2)};
  const VecField3* Xj[2] = {&c.X1, &c.X2};
  double r[2] = {0, 0};
  for (int j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < Omega.size(); ++i) {
      const double v = dO[j][i] + 2 * p.A_mu() * dot(br.at(i), Xj[j]->at(i)) + 2 * p.A_rho() * (*Xj[j])[2][i];
      r[j] = std::max(r[j], std::abs(v));
    }
  return {r[0], r[1]};
}

SpectralRadius spectral_radius_estimate(const QuadratureContext& q, int iters, double rtol) {
  const ParamGrid& g = q.grid();
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> u(-1, 1);
  ScalarField v(g);
  for (double& x : v.v) x = u(rng);
  auto normalize = [](ScalarField& f) {
    const double m = mean(f);
    for (double& x : f.v) x -= m;
    std::vector<double> sq(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) sq[i] = f[i] * f[i];
    const double nrm = std::sqrt(pairwise_sum(sq));
    if (nrm > 0)
      for (double& x : f.v) x /= nrm;
    return nrm;
  };
  normalize(v);
  SpectralRadius out;
  double prev = -1;
  for (int it = 0; it < iters; ++it) {
    v = double_layer_apply(q, v);
    const double lam = normalize(v);
    out.estimate = lam;
    out.iterations = it + 1;
    if (lam == 0) { out.converged = true; break; }
    if (prev > 0 && std::abs(lam - prev) <= rtol * lam) { out.converged = true; break; }
    prev = lam;
  }
  return out;
}

}  // namespace muskat
