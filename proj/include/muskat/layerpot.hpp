#pragma once

#include <string>

#include "muskat/quadrature.hpp"

namespace muskat {

struct FluidParams {
  double mu1 = 1, mu2 = 3;
  double rho1 = 0, rho2 = 2;

  double A_mu() const { return (mu2 - mu1) / (mu2 + mu1); }
  double A_rho() const { return (rho2 - rho1) / (mu2 + mu1); }
  void validate() const;
};

// D(Omega)(a) = (1/2pi) PV int (X(a) - X(b)) / |X(a) - X(b)|^3 . N(b) Omega(b) db
ScalarField double_layer_apply(const QuadratureContext& q, const ScalarField& omega);
ScalarField double_layer_apply(const SurfaceState& s, const GeometryCache& c, const ScalarField& omega);

struct SolverConfig {
  double tol = 1e-12;
  int max_iter = 200;
  int restart = 30;
  enum class Method { automatic, gmres, picard } method = Method::automatic;
};

struct OmegaSolveReport {
  ScalarField Omega;
  int iterations = 0;  // operator applications
  double residual = 0;
  std::string method;  // "direct", "gmres", "picard"
};

// Solves Omega - A_mu D(Omega) = -2 A_rho X3. `guess` (optional) warm-starts
// the iteration. The reported residual is recomputed from the returned Omega:
// max|Omega - A_mu D Omega + 2 A_rho X3| / max|2 A_rho X3| (absolute if the
// right side vanishes).
OmegaSolveReport solve_omega(const QuadratureContext& q, const FluidParams& p,
                             const SolverConfig& cfg, const ScalarField* guess = nullptr);

// Residual of a candidate Omega under the convention above.
double omega_residual(const QuadratureContext& q, const FluidParams& p, const ScalarField& omega);

// omega = d2(Omega) X1 - d1(Omega) X2
VecField3 vorticity_density(const GeometryCache& c, const ScalarField& Omega);

struct DarcyResidual {
  double r1 = 0, r2 = 0;
};

// r_j = max|d_j Omega + 2 A_mu BR . X_j + 2 A_rho d_j X3|
DarcyResidual darcy_residual(const GeometryCache& c, const FluidParams& p, const ScalarField& Omega,
                             const VecField3& br);

struct SpectralRadius {
  double estimate = 0;
  int iterations = 0;
  bool converged = false;
};

// Power iteration for the dominant |eigenvalue| of D on mean-zero fields.
SpectralRadius spectral_radius_estimate(const QuadratureContext& q, int iters, double rtol = 1e-6);

}  // namespace muskat
