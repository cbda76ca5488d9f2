#include "muskat/dynamics.hpp"

#include <algorithm>
#include <cstdio>

#include "muskat/birkhoff_rott.hpp"
#include "muskat/spectral.hpp"

namespace muskat {

Evaluation evaluate(const SurfaceState& s, const StepConfig& cfg, const ScalarField* guess) {
  Evaluation e;
  e.cache = geometry(s);
  const QuadratureContext q(s, e.cache, cfg.quad);
  e.omega = solve_omega(q, cfg.fluid, cfg.solver, guess);
  e.vorticity = vorticity_density(e.cache, e.omega.Omega);
  e.br = br_velocity(q, e.vorticity);
  e.tang = tangential_coeffs(e.cache, e.br);
  e.xt = surface_velocity(e.cache, e.br, e.tang);
  return e;
}

RayleighTaylor rayleigh_taylor(const GeometryCache& c, const FluidParams& p, const VecField3& br) {
  RayleighTaylor r;
  r.sigma = ScalarField(br.grid());
  r.min_sigma = std::numeric_limits<double>::infinity();
  r.max_sigma = -r.min_sigma;
  for (std::size_t i = 0; i < br.size(); ++i) {
    const double s = (p.mu2 - p.mu1) * dot(br.at(i), c.N.at(i)) + (p.rho2 - p.rho1) * c.N[2][i];
    r.sigma[i] = s;
    r.min_sigma = std::min(r.min_sigma, s);
    r.max_sigma = std::max(r.max_sigma, s);
  }
  return r;
}

double energy(const EnergyInputs& in) {
  if (!(in.min_sigma > 0))
    throw RayleighTaylorViolation("energy: min sigma = " + std::to_string(in.min_sigma) + " is not positive");
  return in.x_norm * in.x_norm + in.gauge * in.gauge + in.inv_n + 1.0 / in.min_sigma;
}

double energy(const SurfaceState& s, const EnergyInputs& in, int k) {
  EnergyInputs e = in;
  e.x_norm = sobolev_norm(s, k);
  return energy(e);
}

namespace {

double boundary_ratio(const SurfaceState& s) {
  const ParamGrid& g = s.grid;
  const double mx = max_abs(s.U);
  if (mx == 0) return 0;
  double b = 0;
  for (int j = 0; j < g.n(); ++j)
    for (int c = 0; c < 3; ++c)
      b = std::max({b, std::abs(s.U[c][g.index(0, j)]), std::abs(s.U[c][g.index(j, 0)])});
  return b / mx;
}

}  // namespace

DiagnosticsRecord diagnostics(const SurfaceState& s, const Evaluation& e, const StepConfig& cfg, double t) {
  const GeometryCache& c = e.cache;
  DiagnosticsRecord r;
  r.t = t;
  const RayleighTaylor rt = rayleigh_taylor(c, cfg.fluid, e.br);
  r.min_sigma = rt.min_sigma;
  r.max_sigma = rt.max_sigma;
  r.gauge = chord_arc_gauge(s, cfg.gauge_stride);
  if (cfg.gauge_exact) r.gauge_exact = chord_arc_gauge(s, 1);
  r.inv_n = 1.0 / c.min_normN;
  const IsothermalResidual iso = isothermal_residual(c);
  r.f_inf = max_abs(iso.f);
  r.g_inf = max_abs(iso.g);
  ScalarField q(s.grid);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = iso.f[i] * iso.f[i] + iso.g[i] * iso.g[i];
  r.J = integrate(q);
  const DarcyResidual d = darcy_residual(c, cfg.fluid, e.omega.Omega, e.br);
  r.r1 = d.r1;
  r.r2 = d.r2;
  const bool resolved = s.grid.n() / 4 >= 4;
  r.x_norm4 = resolved ? sobolev_norm(s, 4) : std::numeric_limits<double>::quiet_NaN();
  if (!resolved)
    r.energy = std::numeric_limits<double>::quiet_NaN();
  else if (r.min_sigma > 0)
    r.energy = energy({r.x_norm4, r.gauge, r.inv_n, r.min_sigma});
  else
    r.energy = std::numeric_limits<double>::infinity();
  r.omega_iters = e.omega.iterations;
  r.omega_res = e.omega.residual;
  r.max_xt = max_norm(e.xt);
  const VecField3 d1 = spectral::derivative(e.xt, 1), d2 = spectral::derivative(e.xt, 2);
  for (std::size_t i = 0; i < q.size(); ++i)
    r.grad_xt = std::max(r.grad_xt, std::sqrt(dot(d1.at(i), d1.at(i)) + dot(d2.at(i), d2.at(i))));
  r.amplitude = max_abs(s.U[2]);
  r.margin = margin_ratio(s);
  r.boundary = boundary_ratio(s);
  return r;
}

DiagnosticsRecord diagnose_state(const SurfaceState& s, const StepConfig& cfg, double t) {
  return diagnostics(s, evaluate(s, cfg), cfg, t);
}

SurfaceState advance(const SurfaceState& s, const Evaluation& e1, double dt, const StepConfig& cfg) {
  const ParamGrid& g = s.grid;
  auto shifted = [&](const VecField3& k, double a) {
    VecField3 u = s.U;
    for (int c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < g.size(); ++i) u[c][i] += a * k[c][i];
    return SurfaceState(g, std::move(u));
  };
  auto check = [&](const Evaluation& e) {
    if (!cfg.guarded) return;
    const RayleighTaylor rt = rayleigh_taylor(e.cache, cfg.fluid, e.br);
    if (!(rt.min_sigma > 0))
      throw RayleighTaylorViolation("step: min sigma = " + std::to_string(rt.min_sigma) + " at an RK stage");
  };
  const Evaluation e2 = evaluate(shifted(e1.xt, 0.5 * dt), cfg, &e1.omega.Omega);
  check(e2);
  const Evaluation e3 = evaluate(shifted(e2.xt, 0.5 * dt), cfg, &e2.omega.Omega);
  check(e3);
  const Evaluation e4 = evaluate(shifted(e3.xt, dt), cfg, &e3.omega.Omega);
  check(e4);
  VecField3 u = s.U;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < g.size(); ++i)
      u[c][i] += dt / 6 * (e1.xt[c][i] + 2 * e2.xt[c][i] + 2 * e3.xt[c][i] + e4.xt[c][i]);
  return SurfaceState(g, std::move(u));
}

StepResult step(const SurfaceState& s, double t, double dt, const StepConfig& cfg) {
  if (!(dt > 0) || !std::isfinite(dt)) throw InvalidInput("step: dt must be positive and finite");
  const Evaluation e1 = evaluate(s, cfg);
  DiagnosticsRecord rec = diagnostics(s, e1, cfg, t);
  if (cfg.guarded && rec.min_sigma <= cfg.sigma_min)
    throw RayleighTaylorViolation("step: min sigma = " + std::to_string(rec.min_sigma) +
                                  " <= sigma_min = " + std::to_string(cfg.sigma_min));
  return {advance(s, e1, dt, cfg), rec};
}

MonitorReport monitor_inequalities(const std::vector<DiagnosticsRecord>& h, double rel_tol) {
  MonitorReport m;
  m.valid = h.size() >= 3;
  for (std::size_t k = 0; k + 1 < h.size(); ++k) {
    const DiagnosticsRecord& a = h[k];
    const DiagnosticsRecord& b = h[k + 1];
    const double dt = b.t - a.t;
    if (!(dt > 0)) continue;
    MonitorInterval iv;
    iv.t0 = a.t;
    iv.t1 = b.t;
    iv.lhs = (b.gauge - a.gauge) / dt;
    iv.rhs = a.gauge * a.gauge * std::max(a.grad_xt, b.grad_xt);
    const double tol = rel_tol * iv.rhs;
    iv.margin = iv.rhs + tol - iv.lhs;
    iv.violated = iv.margin < 0;
    if (iv.violated) ++m.violations;
    m.gauge.push_back(iv);
    m.inv_sigma_rate.push_back((1.0 / b.min_sigma - 1.0 / a.min_sigma) / dt);
  }
  return m;
}

std::string csv_header() {
  return "t,min_sigma,gauge,inv_n,f_inf,g_inf,r1,r2,x_norm4,energy,omega_iters,omega_res,max_xt\n";
}

std::string csv_row(const DiagnosticsRecord& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g\n", r.t,
                r.min_sigma, r.gauge, r.inv_n, r.f_inf, r.g_inf, r.r1, r.r2, r.x_norm4, r.energy,
                r.omega_iters, r.omega_res, r.max_xt);
  return buf;
}

int RunResult::exit_code() const {
  if (stop_reason == "t_end") return 0;
  if (stop_reason == "rayleigh-taylor" || stop_reason == "gauge" || stop_reason == "inv-normal" ||
      stop_reason == "max-steps")
    return 2;
  return 1;
}

double choose_dt(const RunConfig& cfg, const ParamGrid& g, const DiagnosticsRecord& rec, double t) {
  const double remaining = cfg.t_end - t;
  if (cfg.dt_policy == DtPolicy::fixed) return std::min(cfg.dt, remaining);
  const FluidParams& p = cfg.step.fluid;
  // Linearized rate about the current state: max(|A_rho|, max sigma / (mu1 + mu2)) |xi|.
  const double rate = std::max(std::abs(p.A_rho()), std::abs(rec.max_sigma) / (p.mu1 + p.mu2));
  const double xi_max = std::sqrt(2.0) * kPi / g.h();
  double dt = remaining;
  if (rate > 0) dt = std::min(dt, cfg.stability / (rate * xi_max));
  if (rec.max_xt > 0) dt = std::min(dt, cfg.cfl * g.h() / rec.max_xt);
  return dt;
}

RunResult run(const RunConfig& cfg, const SurfaceState& initial, const RunObserver& obs) {
  RunResult out;
  out.final_state = initial;
  const ParamGrid& g = initial.grid;
  if (cfg.cadence < 1) throw ConfigError("output.cadence", "must be >= 1");
  if (!(cfg.t_end >= 0)) throw ConfigError("time.t_end", "must be non-negative");
  if (cfg.dt_policy == DtPolicy::fixed && !(cfg.dt > 0)) throw ConfigError("time.dt", "must be positive");
  const double t_eps = 1e-12 * std::max(1.0, std::abs(cfg.t_end));

  SurfaceState s = initial;
  double t = 0;
  double amp0 = -1;
  auto emit = [&](const DiagnosticsRecord& r) {
    out.records.push_back(r);
    if (r.margin > kMarginTolerance) ++out.margin_warnings;
    if (!cfg.step.guarded && !(r.min_sigma > 0)) ++out.rt_flags;
    if (amp0 < 0) amp0 = r.amplitude;
    if (amp0 > 0 && r.amplitude > 10 * amp0) out.growth_flag = true;
    if (obs.on_record) obs.on_record(r);
  };
  auto snapshot = [&](int k) {
    if (obs.on_snapshot) obs.on_snapshot(s, t, k);
  };

  try {
    snapshot(0);
    int k = 0;
    while (true) {
      const Evaluation e1 = evaluate(s, cfg.step);
      const DiagnosticsRecord rec = diagnostics(s, e1, cfg.step, t);
      emit(rec);
      if (cfg.step.guarded && rec.min_sigma <= cfg.step.sigma_min) {
        out.stop_reason = "rayleigh-taylor";
        out.message = "min sigma " + std::to_string(rec.min_sigma) + " <= sigma_min";
        break;
      }
      if (rec.gauge > cfg.gauge_max) { out.stop_reason = "gauge"; break; }
      if (rec.inv_n > cfg.inv_n_max) { out.stop_reason = "inv-normal"; break; }
      if (t >= cfg.t_end - t_eps) { out.stop_reason = "t_end"; break; }
      if (k >= cfg.max_steps) { out.stop_reason = "max-steps"; break; }
      double dt = choose_dt(cfg, g, rec, t);
      if (cfg.t_end - (t + dt) <= t_eps) dt = cfg.t_end - t;
      s = advance(s, e1, dt, cfg.step);
      t = (cfg.t_end - (t + dt) <= t_eps) ? cfg.t_end : t + dt;
      ++k;
      out.steps = k;
      if (k % cfg.cadence == 0) snapshot(k);
    }
    if (out.steps % cfg.cadence != 0) snapshot(out.steps);
  } catch (const Error& err) {
    out.stop_reason = err.kind();
    out.message = err.what();
    if (out.steps % cfg.cadence != 0) snapshot(out.steps);
  }
  out.final_state = s;
  out.t = t;
  out.monitor = monitor_inequalities(out.records);
  return out;
}

}  // namespace muskat
