#pragma once

#include <span>
#include <vector>

#include "roughtail/common.hpp"
#include "roughtail/grid_path.hpp"
#include "roughtail/phi.hpp"

namespace roughtail {

/// Grid levels (cell counts 2^level) at which a functional is evaluated for
/// convergence reporting; strictly increasing, the last is the reported value.
struct QuadratureConfig {
  std::vector<int> refinement_levels{8, 9, 10};
  double gamma_hint = 0.3;  // Holder exponent used for diagonal handling docs

  void validate() const;
  int finest() const { return refinement_levels.back(); }
};

/// value at the finest level; quad_error = |finest - next finest| (0 when a
/// single level is requested).
struct QuadValue {
  double value = 0.0;
  double quad_error = 0.0;
};

enum class HolderMode { kExact, kDyadicApprox };

/// Discrete Holder seminorm max |x_t - x_s| / |t-s|^gamma over grid pairs.
/// kExact scans all O(n^2) pairs; kDyadicApprox restricts to lags that are
/// powers of two (a lower bound, O(n log n)).
double holder_norm(const GridPath& x, double gamma, HolderMode mode = HolderMode::kExact);

/// Squared fractional Sobolev norm of a grid function f on [0,1] for
/// H in (1/4,1/2):
///   H(1-2H) [ simplex term + exterior term ],
/// where the exterior contribution over R \ [0,1] is integrated in closed
/// form into the weight t^{2H-1} + (1-t)^{2H-1}. Equals R(t,t) = t^{2H} for
/// f = 1_{[0,t]}.
QuadValue frac_sobolev_sq(const GridPath& f, HurstParam hurst, const QuadratureConfig& q);

/// Simplex double integral of (phi(x_t) - phi(x_s))^2 / (t-s)^{2-2H}
/// over 0 < s < t < 1. Requires H < 1/2.
QuadValue gagliardo_energy(const GridPath& x, const PhiSpec& phi, HurstParam hurst,
                           const QuadratureConfig& q);

/// Exterior part (1/(1-2H)) \int_0^1 phi(x_t)^2 (t^{2H-1} + (1-t)^{2H-1}) dt
/// with the integrable endpoint singularities handled by exact per-cell
/// kernel primitives. Evaluated at the path's own resolution.
double boundary_energy(const GridPath& x, const PhiSpec& phi, HurstParam hurst);

/// Conditional variance of the line integral given the path x: the squared
/// fractional Sobolev norm of t -> phi(x_t). Identical code path to
/// frac_sobolev_sq composed with phi.
QuadValue conditional_variance(const GridPath& x, const PhiSpec& phi, HurstParam hurst,
                               const QuadratureConfig& q);

namespace detail {

/// Core cell scheme at one resolution. `values` samples the integrand
/// function at level Q = cells_level + 1 (even indices are cell edges, odd
/// indices are cell centres).
///
/// Off-diagonal cell pairs use the exact kernel primitive
///   F(u) = u^{2H} / (2H (2H-1)),
/// so the pair weight depends only on the index gap; the squared difference
/// is taken at cell centres. Diagonal (triangle) cells replace the squared
/// difference by slope^2 (t-s)^2 with the edge-to-edge slope and integrate
/// (t-s)^{2H} exactly. Every cell integral is finite although the kernel is
/// not locally integrable.
double simplex_energy_at(std::span<const double> values, double h_exponent);

/// Exterior weight integral at the sampling's own cell resolution, with
/// squared centre values against exact per-cell masses of t^{2H-1} and
/// (1-t)^{2H-1}.
double boundary_integral_at(std::span<const double> values, double h_exponent);

/// Resample the path to exactly level Q (piecewise-linear exact both ways).
std::vector<double> resample_values(const GridPath& x, int level_q);

}  // namespace detail

}  // namespace roughtail
