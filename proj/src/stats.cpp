#include "roughtail/stats.hpp"

namespace roughtail {

Moments compute_moments(std::span<const double> xs) {
  Moments m;
  m.n = static_cast<std::int64_t>(xs.size());
  if (m.n == 0) return m;
  m.mean = mean_of(xs);
  std::vector<double> p2(xs.size()), p3(xs.size()), p4(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - m.mean;
    const double d2 = d * d;
    p2[i] = d2;
    p3[i] = d2 * d;
    p4[i] = d2 * d2;
  }
  const double n = static_cast<double>(m.n);
  m.m2 = compensated_sum(p2) / n;
  m.m3 = compensated_sum(p3) / n;
  m.m4 = compensated_sum(p4) / n;
  return m;
}

MeanStderr mean_stderr(std::span<const double> xs) {
  const Moments m = compute_moments(xs);
  return {m.mean, m.stderr_mean()};
}

LineFit fit_line(std::span<const double> xs, std::span<const double> ys,
                 std::span<const double> y_variances) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw ConfigError("fit_line needs >= 2 points with matching x/y sizes");
  }
  if (!y_variances.empty() && y_variances.size() != xs.size()) {
    throw ConfigError("fit_line variance list size mismatch");
  }
  LineFit fit;
  fit.n = xs.size();
  const double n = static_cast<double>(xs.size());
  const double xbar = mean_of(xs);
  const double ybar = mean_of(ys);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - xbar;
    const double dy = ys[i] - ybar;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw ConfigError("fit_line: degenerate x values");
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;

  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
  if (xs.size() > 2) {
    fit.slope_stderr_ols = std::sqrt(ss_res / (n - 2.0) / sxx);
  }
  if (!y_variances.empty()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double c = (xs[i] - xbar) / sxx;
      acc += c * c * y_variances[i];
    }
    fit.slope_stderr_delta = std::sqrt(acc);
  }
  return fit;
}

}  // namespace roughtail
