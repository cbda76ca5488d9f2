#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "muskat/layerpot.hpp"
#include "muskat/tangential.hpp"

namespace muskat {

struct StepConfig {
  FluidParams fluid;
  SolverConfig solver;
  QuadratureConfig quad;
  bool guarded = true;
  double sigma_min = 1e-8;  // guarded runs stop when min sigma <= sigma_min
  int gauge_stride = 4;
  bool gauge_exact = false;  // also evaluate the stride-1 gauge
};

// Everything derived from one state in one velocity evaluation.
struct Evaluation {
  GeometryCache cache;
  OmegaSolveReport omega;
  VecField3 vorticity;
  VecField3 br;
  TangentialFields tang;
  VecField3 xt;
};

// Solves for Omega (cold start from -2 A_rho X3 unless `guess` is given) and
// assembles X_t = BR + C1 X1 + C2 X2.
Evaluation evaluate(const SurfaceState& s, const StepConfig& cfg, const ScalarField* guess = nullptr);

struct RayleighTaylor {
  ScalarField sigma;
  double min_sigma = 0;
  double max_sigma = 0;
};

// sigma = (mu2 - mu1) BR . N + (rho2 - rho1) N3
RayleighTaylor rayleigh_taylor(const GeometryCache& c, const FluidParams& p, const VecField3& br);

struct EnergyInputs {
  double x_norm = 0;  // ||X||_k
  double gauge = 1;   // ||F(X)||_inf
  double inv_n = 1;   // || |N|^{-1} ||_inf
  double min_sigma = 1;
};

// E = ||X||_k^2 + ||F||_inf^2 + || |N|^{-1} ||_inf + 1 / min sigma
double energy(const EnergyInputs& in);
double energy(const SurfaceState& s, const EnergyInputs& in, int k = 4);

struct DiagnosticsRecord {
  double t = 0;
  double min_sigma = 0;
  double max_sigma = 0;
  double gauge = 0;        // strided
  double gauge_exact = std::numeric_limits<double>::quiet_NaN();
  double inv_n = 0;
  double f_inf = 0, g_inf = 0;
  double J = 0;            // int f^2 + g^2
  double r1 = 0, r2 = 0;
  double x_norm4 = 0;
  double energy = 0;
  int omega_iters = 0;
  double omega_res = 0;
  double max_xt = 0;
  double grad_xt = 0;      // max over nodes of |grad X_t| (Frobenius)
  double amplitude = 0;    // max |U3|
  double margin = 0;       // margin_ratio
  double boundary = 0;     // max|U| on the box edge / max|U|
};

DiagnosticsRecord diagnostics(const SurfaceState& s, const Evaluation& e, const StepConfig& cfg, double t);

// Record for a state on its own (cold-start solve); this is what `diagnose`
// reports and equals the in-run record at the same t.
DiagnosticsRecord diagnose_state(const SurfaceState& s, const StepConfig& cfg, double t);

// Advances one classical RK4 step from the stage-1 evaluation `e1`. Stages
// 2-4 warm-start the Omega solve from the previous stage.
SurfaceState advance(const SurfaceState& s, const Evaluation& e1, double dt, const StepConfig& cfg);

struct StepResult {
  SurfaceState state;
  DiagnosticsRecord record;
};

// Diagnostics at the start of the step, guard checks, then one RK4 step.
StepResult step(const SurfaceState& s, double t, double dt, const StepConfig& cfg);

struct MonitorInterval {
  double t0 = 0, t1 = 0;
  double lhs = 0;     // (F1 - F0) / dt
  double rhs = 0;     // F0^2 max(grad_xt0, grad_xt1)
  double margin = 0;  // rhs + tol - lhs
  bool violated = false;
};

struct MonitorReport {
  bool valid = false;  // at least 3 records
  std::vector<MonitorInterval> gauge;
  std::vector<double> inv_sigma_rate;  // finite-difference d(1/min sigma)/dt
  int violations = 0;
};

// rel_tol scales the per-interval tolerance: tol = rel_tol F0^2 max grad_xt.
MonitorReport monitor_inequalities(const std::vector<DiagnosticsRecord>& history, double rel_tol = 1e-3);

enum class DtPolicy { fixed, cfl };

struct RunConfig {
  StepConfig step;
  DtPolicy dt_policy = DtPolicy::cfl;
  double dt = 0.01;    // fixed policy
  double cfl = 0.5;    // dt = cfl h / max|X_t|, capped by the linear stability limit
  double stability = 2.0;  // cap: stability / (rate * xi_max)
  double t_end = 1.0;
  int max_steps = 100000;
  double gauge_max = 1e6;
  double inv_n_max = 1e6;
  int cadence = 1;  // snapshot every `cadence` steps (and at the end)
};

struct RunResult {
  std::vector<DiagnosticsRecord> records;
  std::string stop_reason;  // "t_end", "rayleigh-taylor", "gauge", "inv-normal", "max-steps", or an error kind
  std::string message;
  SurfaceState final_state;
  double t = 0;
  int steps = 0;
  int rt_flags = 0;          // unguarded records with min sigma <= 0
  bool growth_flag = false;  // amplitude exceeded 10x its initial value
  int margin_warnings = 0;
  MonitorReport monitor;

  // 0 clean finish, 2 guarded stop, 1 error
  int exit_code() const;
};

struct RunObserver {
  std::function<void(const DiagnosticsRecord&)> on_record;
  std::function<void(const SurfaceState&, double t, int step)> on_snapshot;
};

// Time-series CSV: fixed header and one row per record, 17 significant digits.
std::string csv_header();
std::string csv_row(const DiagnosticsRecord& r);

double choose_dt(const RunConfig& cfg, const ParamGrid& g, const DiagnosticsRecord& rec, double t);

RunResult run(const RunConfig& cfg, const SurfaceState& initial, const RunObserver& obs = {});

}  // namespace muskat
