#include "roughtail/roughint.hpp"

#include <cmath>
#include <memory>

#include "roughtail/parallel.hpp"
#include "roughtail/stats.hpp"

namespace roughtail {

GridPath dyadic_interp(const GridPath& x, int m) {
  if (m < 0 || m > x.level) {
    throw ConfigError("dyadic_interp requires 0 <= m <= path level, got m = " + std::to_string(m));
  }
  return upsample(subsample(x, m), x.level);
}

double rs_integral(const GridPath& x, const GridPath& y, const PhiSpec& phi, int m) {
  require_same_grid(x, y, "rs_integral");
  if (m < 0 || m > x.level) throw ConfigError("rs_integral requires 0 <= m <= grid level");
  const std::size_t stride = std::size_t{1} << (x.level - m);
  const std::size_t cells = std::size_t{1} << m;
  std::vector<double> terms(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    const double xa = x.values[k * stride];
    const double xb = x.values[(k + 1) * stride];
    const double dy = y.values[(k + 1) * stride] - y.values[k * stride];
    terms[k] = dy * phi.segment_average(xa, xb);
  }
  return compensated_sum(terms);
}

DyadicLadder integral_ladder(const GridPath& x, const GridPath& y, const PhiSpec& phi,
                             const std::vector<int>& levels) {
  if (levels.empty()) throw ConfigError("integral_ladder requires at least one level");
  DyadicLadder ladder;
  ladder.levels = levels;
  ladder.integrals.reserve(levels.size());
  for (int m : levels) ladder.integrals.push_back(rs_integral(x, y, phi, m));
  for (std::size_t i = 0; i + 1 < ladder.integrals.size(); ++i) {
    ladder.successive_diffs.push_back(std::abs(ladder.integrals[i + 1] - ladder.integrals[i]));
  }
  return ladder;
}

CondVarResult conditional_variance_mc(const GridPath& x, const PhiSpec& phi, HurstParam hurst,
                                      int m, std::int64_t n_samples, std::uint64_t seed,
                                      std::uint64_t stream_base, int y_level, int threads) {
  if (n_samples < 1000) throw ConfigError("conditional_variance_mc requires n_samples >= 1000");
  if (y_level < m) throw ConfigError("conditional_variance_mc requires y_level >= m");

  // x^(m) has knots on the level-m grid, so resampling to y_level is exact.
  GridPath x_work = subsample(dyadic_interp(x, m), std::min(x.level, y_level));
  if (x_work.level < y_level) x_work = upsample(x_work, y_level);

  CirculantFbmSampler sampler(y_level, hurst);
  threads = resolve_threads(threads);
  std::vector<std::unique_ptr<CirculantFbmSampler::Workspace>> scratch;
  scratch.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    scratch.push_back(std::make_unique<CirculantFbmSampler::Workspace>(sampler));
  }

  std::vector<double> samples(static_cast<std::size_t>(n_samples));
  parallel_for_indexed(n_samples, threads, [&](int worker, std::int64_t i) {
    RngStream rng(seed, stream_base + static_cast<std::uint64_t>(i));
    const GridPath y = sampler.sample(rng, *scratch[worker]);
    samples[static_cast<std::size_t>(i)] = rs_integral(x_work, y, phi, y_level);
  });

  const Moments mom = compute_moments(samples);
  std::vector<double> sq(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) sq[i] = samples[i] * samples[i];
  const MeanStderr m2 = mean_stderr(sq);

  CondVarResult out;
  out.mean = mom.mean;
  out.mean_stderr = mom.stderr_mean();
  out.second_moment = m2.mean;
  out.second_moment_stderr = m2.stderr_;
  out.skewness = mom.skewness();
  out.excess_kurtosis = mom.excess_kurtosis();
  out.skewness_stderr = mom.skewness_stderr();
  out.kurtosis_stderr = mom.kurtosis_stderr();
  out.n = n_samples;
  out.y_level = y_level;
  return out;
}

}  // namespace roughtail
