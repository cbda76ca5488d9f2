#pragma once

#include <array>

#include "muskat/surface.hpp"

namespace muskat {

struct QuadratureConfig {
  // Radius (in cells) of the ring on which the leading odd kernel is
  // subtracted pairwise from the Birkhoff-Rott sum.
  int ring = 3;
  // Width of the Gaussian window carrying the local singular correction.
  // Non-positive selects L/8.
  double window = 0.0;
  // Fixed pairwise-tree reduction order for every target sum.
  bool deterministic = true;
  // Sources with nearest-image max-norm offset beyond this are skipped.
  // Non-positive selects the box half-width L.
  double cutoff = 0.0;
  // Angular nodes for the continuous moment integrals.
  int angular_nodes = 256;
  // Far field of the flat-sheet part of Birkhoff-Rott. `box` sums nearest-image
  // offsets only (free-space model for data decaying inside the box, consistent
  // with the double layer); `periodic` uses the exact periodic Riesz form (for
  // data that is periodic across the box, e.g. single Fourier modes).
  enum class FarField { box, periodic } far_field = FarField::box;

  void validate(const ParamGrid& g) const;
};

// Per-node singular-correction data. The punctured trapezoid sum of a kernel
// whose expansion about the target is S_{-2} (odd) + S_{-1} (even, degree -1)
// misses a term of order h. It is restored with moment differences
//   dm2_ik   = c_w * int_circle t_i t_k / |A t|^3      - h^2 sum' w(x) x_i x_k / |A x|^3
//   dm4_abik = c_w * int_circle t_a t_b t_i t_k/|A t|^5 - h^2 sum' w(x) x_a x_b x_i x_k / |A x|^5
// where A = grad X at the target, w(r) = exp(-r^2/delta^2), c_w = int_0^inf w.
struct PvMoments {
  std::array<ScalarField, 3> dm2;  // (11, 12, 22)
  std::array<ScalarField, 5> dm4;  // number of 2-indices = 0..4
  double flat_dm2 = 0;             // identity-metric dm2_11 (= dm2_22, dm2_12 = 0)
  double delta = 0;
};

// Continuous and windowed-lattice moments for one metric; exposed for tests.
struct MomentSet {
  std::array<double, 3> m2{};
  std::array<double, 5> m4{};
};
MomentSet continuous_moments(double g11, double g12, double g22, int angular_nodes);
MomentSet lattice_moments(double g11, double g12, double g22, double h, double delta);

PvMoments pv_moments(const GeometryCache& c, const QuadratureConfig& cfg, double h, double L);

// Bundles a surface, its geometry and the derived correction data needed by
// the double-layer and Birkhoff-Rott quadratures. Holds non-owning pointers:
// the state and cache must outlive the context.
class QuadratureContext {
public:
  QuadratureContext(const SurfaceState& s, const GeometryCache& c, QuadratureConfig cfg = {});

  const SurfaceState& state() const { return *state_; }
  const GeometryCache& cache() const { return *cache_; }
  const ParamGrid& grid() const { return state_->grid; }
  const QuadratureConfig& config() const { return cfg_; }
  const PvMoments& moments() const { return moments_; }
  double cutoff() const { return cutoff_; }

  // (1/4pi) * sum_ik dm2_ik X_ik . N : diagonal correction of the double layer.
  const ScalarField& dl_diagonal() const { return dl_diag_; }
  // -1/2 sum dm2_ik X_ik + 3/2 sum dm4_baik X_b (X_a . X_ik): curvature part of
  // the Birkhoff-Rott correction (crossed with omega at the target).
  const VecField3& br_curvature() const { return br_curv_; }

private:
  const SurfaceState* state_;
  const GeometryCache* cache_;
  QuadratureConfig cfg_;
  PvMoments moments_;
  double cutoff_;
  ScalarField dl_diag_;
  VecField3 br_curv_;
};

// Raw punctured pair sums over nearest-image offsets with h^2 weights.
//   dl_pair_sum:  sum' (X(a) - X(b)) . psi(b) / |X(a) - X(b)|^3
//   br_remainder_pair_sum:
//     sum' [ u/|u|^3 - (a-b, 0)/|a-b|^3 ] ^ omega(b),  u = X(a) - X(b),
//   minus the linearized odd kernel on the near ring. Throws SelfIntersection
//   when two distinct nodes coincide.
ScalarField dl_pair_sum(const QuadratureContext& q, const VecField3& psi);
VecField3 br_remainder_pair_sum(const QuadratureContext& q, const VecField3& omega);

}  // namespace muskat
