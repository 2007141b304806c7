#pragma once

#include <cstdint>
#include <vector>

#include "roughtail/common.hpp"
#include "roughtail/fbm.hpp"
#include "roughtail/grid_path.hpp"
#include "roughtail/phi.hpp"

namespace roughtail {

/// Level-M sampling of the piecewise-linear interpolant through the level-m
/// dyadic knots of x. A projection: applying it twice at the same m is the
/// identity on the first application's output.
GridPath dyadic_interp(const GridPath& x, int m);

/// Riemann-Stieltjes integral of phi along the level-m interpolants:
///   int_0^1 phi(x^(m)_t) dy^(m)_t
///     = sum_k (y-knot increment) * (average of phi over x's linear segment),
/// with segment averages exact for the built-in phi family.
double rs_integral(const GridPath& x, const GridPath& y, const PhiSpec& phi, int m);

struct DyadicLadder {
  std::vector<int> levels;
  std::vector<double> integrals;
  std::vector<double> successive_diffs;  // |I_{m_{k+1}} - I_{m_k}|
};

/// The integral across interpolation levels; Cauchy behaviour of the
/// successive differences is the desk-scale convergence certificate.
DyadicLadder integral_ladder(const GridPath& x, const GridPath& y, const PhiSpec& phi,
                             const std::vector<int>& levels);

struct CondVarResult {
  double mean = 0.0;
  double mean_stderr = 0.0;
  double second_moment = 0.0;         // sample mean of S^2; the MC conditional variance
  double second_moment_stderr = 0.0;  // sd(S^2)/sqrt(n)
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double skewness_stderr = 0.0;
  double kurtosis_stderr = 0.0;
  std::int64_t n = 0;
  int y_level = 0;
};

/// Monte Carlo law of int phi(x^(m)) dY for a frozen path x: samples
/// independent driving paths Y at level y_level (>= m; the x interpolant is
/// resampled exactly) and integrates against them. The sample mean estimates
/// the conditional mean (zero), the second moment the conditional variance.
/// One RNG stream per sample; results independent of thread count.
CondVarResult conditional_variance_mc(const GridPath& x, const PhiSpec& phi, HurstParam hurst,
                                      int m, std::int64_t n_samples, std::uint64_t seed,
                                      std::uint64_t stream_base, int y_level, int threads);

}  // namespace roughtail
