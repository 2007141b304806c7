#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "roughtail/common.hpp"

namespace roughtail {

/// Neumaier compensated sum; deterministic for a fixed element order.
inline double compensated_sum(std::span<const double> xs) {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

inline double mean_of(std::span<const double> xs) {
  return xs.empty() ? 0.0 : compensated_sum(xs) / static_cast<double>(xs.size());
}

/// Central sample moments up to order four (two-pass, compensated).
struct Moments {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;  // central second moment (biased, 1/n)
  double m3 = 0.0;
  double m4 = 0.0;

  double variance() const { return m2; }
  double stddev() const { return std::sqrt(m2); }
  double stderr_mean() const { return n > 0 ? std::sqrt(m2 / static_cast<double>(n)) : 0.0; }
  double skewness() const { return m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0; }
  double excess_kurtosis() const { return m2 > 0 ? m4 / (m2 * m2) - 3.0 : 0.0; }
  // Large-sample null standard errors for normality checks.
  double skewness_stderr() const { return n > 0 ? std::sqrt(6.0 / static_cast<double>(n)) : 0.0; }
  double kurtosis_stderr() const { return n > 0 ? std::sqrt(24.0 / static_cast<double>(n)) : 0.0; }
};

Moments compute_moments(std::span<const double> xs);

/// Mean and standard error of the mean.
struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

MeanStderr mean_stderr(std::span<const double> xs);

/// Ordinary least squares y ~ intercept + slope * x, with optional per-point
/// variances for a delta-method slope standard error.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr_ols = 0.0;    // from residuals
  double slope_stderr_delta = 0.0;  // from supplied per-point variances
  std::size_t n = 0;
};

LineFit fit_line(std::span<const double> xs, std::span<const double> ys,
                 std::span<const double> y_variances = {});

/// Two-sided standard normal tail P(|Z| > r) = erfc(r / sqrt(2)).
inline double gaussian_two_sided_tail(double r) {
  if (r < 0.0) throw ConfigError("gaussian_two_sided_tail requires r >= 0");
  return std::erfc(r * 0.7071067811865475244);
}

}  // namespace roughtail
