#include "roughtail/tail.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "roughtail/parallel.hpp"
#include "roughtail/roughint.hpp"
#include "roughtail/stats.hpp"

namespace roughtail {

std::string to_string(TailFunctional f) {
  switch (f) {
    case TailFunctional::kCondVar: return "cond-var";
    case TailFunctional::kEnergy: return "energy";
    case TailFunctional::kLineIntegral: return "line-integral";
  }
  return "?";
}

std::vector<std::pair<double, QuadValue>> scaling_sweep(const WeierstrassParams& p, double rho,
                                                        const PhiSpec& phi, HurstParam hurst,
                                                        const std::vector<double>& lambdas,
                                                        const QuadratureConfig& q) {
  q.validate();
  if (lambdas.empty()) throw ConfigError("scaling_sweep needs a lambda grid");
  if (!std::is_sorted(lambdas.begin(), lambdas.end())) {
    throw ConfigError("scaling_sweep lambda grid must be increasing");
  }
  if (!(rho > 0.0)) throw ConfigError("scaling_sweep requires rho > 0");

  // One evaluation of the series at the finest sampling; coarser refinement
  // levels are exact decimations.
  const GridPath base = discretize_weierstrass(p, q.finest() + 1);
  std::vector<std::pair<double, QuadValue>> out;
  out.reserve(lambdas.size());
  for (double lam : lambdas) {
    out.emplace_back(lam, gagliardo_energy(scale(base, lam * rho), phi, hurst, q));
  }
  return out;
}

namespace detail {

double eval_tail_functional(const GridPath& x, const PhiSpec& phi, HurstParam hurst,
                            TailFunctional functional, int cells_level) {
  const std::vector<double> xs = resample_values(x, cells_level + 1);
  std::vector<double> vals(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) vals[i] = phi.value(xs[i]);
  switch (functional) {
    case TailFunctional::kEnergy:
      return simplex_energy_at(vals, hurst.h);
    case TailFunctional::kCondVar: {
      const double pref = hurst.h * (1.0 - 2.0 * hurst.h);
      return pref * (simplex_energy_at(vals, hurst.h) + boundary_integral_at(vals, hurst.h));
    }
    case TailFunctional::kLineIntegral:
      throw ConfigError("line-integral functional needs the two-coordinate sampler path");
  }
  return 0.0;
}

double minimize_golden(const std::function<double(double)>& f, double lo, double hi, double tol) {
  const double gr = 0.6180339887498948482;
  double a = lo, b = hi;
  while (b - a > tol * (1.0 + std::abs(a))) {
    const double m1 = b - gr * (b - a);
    const double m2 = a + gr * (b - a);
    const double f1 = f(m1), f2 = f(m2);
    // An overflow plateau on the right (both infinite) still means the
    // minimum lies to the left.
    if (f1 < f2 || (std::isinf(f1) && std::isinf(f2))) {
      b = m2;
    } else {
      a = m1;
    }
  }
  return 0.5 * (a + b);
}

namespace {

int resolve_cells_level(const GaussianGridModel& model, int cells_level) {
  if (cells_level < 1) return std::max(1, model.level - 1);
  return cells_level;
}

struct SampleBatch {
  std::vector<double> values;
  std::vector<double> log_weights;  // empty for plain MC
};

SampleBatch run_samples(const GaussianGridModel& model, const PhiSpec& phi,
                        TailFunctional functional, const GridPath* shift, std::int64_t n,
                        std::uint64_t seed, std::uint64_t stream_base, int cells_level,
                        int threads) {
  SampleBatch batch;
  batch.values.resize(static_cast<std::size_t>(n));
  if (shift != nullptr) batch.log_weights.resize(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](std::int64_t i) {
    RngStream rng(seed, stream_base + static_cast<std::uint64_t>(i));
    GridPath x = sample_fbm(model, rng);
    if (shift != nullptr) {
      x = axpby(1.0, x, 1.0, *shift);
      batch.log_weights[static_cast<std::size_t>(i)] = shift_log_density_ratio(model, x, *shift);
    }
    double val;
    if (functional == TailFunctional::kLineIntegral) {
      const GridPath y = sample_fbm(model, rng);
      val = std::abs(rs_integral(x, y, phi, model.level));
    } else {
      val = eval_tail_functional(x, phi, model.hurst, functional, cells_level);
    }
    batch.values[static_cast<std::size_t>(i)] = val;
  });
  return batch;
}

}  // namespace

}  // namespace detail

std::vector<double> sample_functional_batch(const GaussianGridModel& model, const PhiSpec& phi,
                                            TailFunctional functional, std::int64_t n,
                                            std::uint64_t seed, std::uint64_t stream_base,
                                            int cells_level, int threads) {
  if (n < 1000) throw ConfigError("tail sampling requires n >= 1000");
  cells_level = detail::resolve_cells_level(model, cells_level);
  return detail::run_samples(model, phi, functional, nullptr, n, seed, stream_base, cells_level,
                             threads)
      .values;
}

TailEstimate plain_estimate_from_batch(std::span<const double> values, double lambda,
                                       std::uint64_t seed) {
  TailEstimate est;
  est.lambda = lambda;
  est.method = "plain-mc";
  est.n_samples = static_cast<std::int64_t>(values.size());
  est.seed = seed;
  for (double v : values) {
    if (v > lambda) ++est.hits;
  }
  const double nn = static_cast<double>(values.size());
  est.p_hat = static_cast<double>(est.hits) / nn;
  est.stderr_ = std::sqrt(est.p_hat * (1.0 - est.p_hat) / nn);
  est.ess = nn;
  if (est.hits == 0) {
    est.suggest_tilted = true;
    est.p_upper_rule_of_three = 3.0 / nn;
  }
  return est;
}

TailEstimate mc_tail(const GaussianGridModel& model, const PhiSpec& phi, TailFunctional functional,
                     double lambda, std::int64_t n, std::uint64_t seed, std::uint64_t stream_base,
                     int cells_level, int threads) {
  const std::vector<double> values =
      sample_functional_batch(model, phi, functional, n, seed, stream_base, cells_level, threads);
  return plain_estimate_from_batch(values, lambda, seed);
}

TiltedBatch sample_tilted_batch(const GaussianGridModel& model, const PhiSpec& phi,
                                const GridPath& shift, TailFunctional functional, std::int64_t n,
                                std::uint64_t seed, std::uint64_t stream_base, int cells_level,
                                int threads) {
  if (n < 1000) throw ConfigError("tail sampling requires n >= 1000");
  if (shift.level != model.level || shift.values.size() != grid_size(model.level)) {
    throw ConfigError("cm_tilted_tail: shift does not live on the model grid");
  }
  cells_level = detail::resolve_cells_level(model, cells_level);
  detail::SampleBatch batch = detail::run_samples(model, phi, functional, &shift, n, seed,
                                                  stream_base, cells_level, threads);
  return {std::move(batch.values), std::move(batch.log_weights)};
}

TailEstimate tilted_estimate_from_batch(const TiltedBatch& batch, double lambda,
                                        std::uint64_t seed) {
  TailEstimate est;
  est.lambda = lambda;
  est.method = "cm-tilted";
  est.n_samples = static_cast<std::int64_t>(batch.values.size());
  est.seed = seed;

  double max_lw = -std::numeric_limits<double>::infinity();
  for (double lw : batch.log_weights) max_lw = std::max(max_lw, lw);
  est.max_log_weight = max_lw;

  const double nn = static_cast<double>(batch.values.size());
  std::vector<double> w1(batch.values.size()), w2(batch.values.size());
  std::vector<double> all1(batch.values.size()), all2(batch.values.size());
  for (std::size_t i = 0; i < batch.values.size(); ++i) {
    const double w = std::exp(batch.log_weights[i] - max_lw);
    const bool hit = batch.values[i] > lambda;
    if (hit) ++est.hits;
    w1[i] = hit ? w : 0.0;
    w2[i] = hit ? w * w : 0.0;
    all1[i] = w;
    all2[i] = w * w;
  }
  const double s1 = compensated_sum(w1);
  const double s2 = compensated_sum(w2);
  const double scale = std::exp(max_lw);
  est.p_hat = scale * s1 / nn;
  const double m2 = scale * scale * s2 / nn;  // E[(w * hit)^2]
  est.stderr_ = std::sqrt(std::max(0.0, m2 - est.p_hat * est.p_hat) / nn);
  const double a1 = compensated_sum(all1);
  const double a2 = compensated_sum(all2);
  est.ess = a2 > 0.0 ? a1 * a1 / a2 : 0.0;
  if (est.hits == 0) {
    est.suggest_tilted = true;  // the shift needs retuning
    est.p_upper_rule_of_three = 3.0 / nn;
  }
  return est;
}

TailEstimate cm_tilted_tail(const GaussianGridModel& model, const PhiSpec& phi,
                            const GridPath& shift, TailFunctional functional, double lambda,
                            std::int64_t n, std::uint64_t seed, std::uint64_t stream_base,
                            int cells_level, int threads) {
  const TiltedBatch batch = sample_tilted_batch(model, phi, shift, functional, n, seed,
                                                stream_base, cells_level, threads);
  return tilted_estimate_from_batch(batch, lambda, seed);
}

ExponentFit fit_weibull_exponent(std::span<const TailEstimate> estimates, double drop_frac) {
  struct Point {
    double lambda, p, var_p;
  };
  std::vector<Point> pts;
  std::size_t excluded = 0;
  for (const auto& e : estimates) {
    if (e.p_hat <= 0.0 || e.p_hat >= 1.0) {
      ++excluded;
      continue;
    }
    pts.push_back({e.lambda, e.p_hat, e.stderr_ * e.stderr_});
  }
  if (pts.size() < 4) {
    throw ConfigError("fit_weibull_exponent: fewer than 4 usable points (" +
                      std::to_string(pts.size()) + " usable, " + std::to_string(excluded) +
                      " excluded at p in {0,1})");
  }
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.lambda < b.lambda; });
  std::size_t drop = static_cast<std::size_t>(std::floor(drop_frac * static_cast<double>(pts.size())));
  drop = std::min(drop, pts.size() - 4);
  pts.erase(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(drop));

  std::vector<double> xs, ys, vars;
  for (const auto& p : pts) {
    xs.push_back(std::log(p.lambda));
    const double lp = std::log(p.p);
    ys.push_back(std::log(-lp));
    const double dydp = 1.0 / (p.p * lp);  // d log(-log p) / dp
    vars.push_back(dydp * dydp * p.var_p);
  }
  const LineFit fit = fit_line(xs, ys, vars);

  ExponentFit out;
  out.gamma_hat = fit.slope;
  out.intercept = fit.intercept;
  out.r_squared = fit.r_squared;
  out.gamma_stderr = fit.slope_stderr_delta;
  out.gamma_stderr_ols = fit.slope_stderr_ols;
  out.n_used = pts.size();
  out.n_excluded = excluded;
  out.lambda_lo = pts.front().lambda;
  out.lambda_hi = pts.back().lambda;
  return out;
}

namespace {

void check_theory_args(HurstParam hurst, double alpha, double c2, double c4) {
  hurst.require_main_regime("theory_lower_curve");
  if (!(c2 > 0.0 && c4 > 0.0)) throw ConfigError("theory_lower_curve requires c2, c4 > 0");
  if (!(alpha > hurst.h + 0.5 && alpha < 1.0)) {
    throw ConfigError("theory_lower_curve requires alpha in (H + 1/2, 1)");
  }
}

}  // namespace

double theory_optimal_r(double lambda, HurstParam hurst, double alpha, double c2, double c4) {
  check_theory_args(hurst, alpha, c2, c4);
  const double one_m2h = 1.0 - 2.0 * hurst.h;
  const double expnt = one_m2h / (1.0 + 2.0 * alpha - 2.0 * hurst.h);
  return std::pow(c2 * one_m2h * lambda * lambda / (2.0 * alpha * c4), expnt);
}

double theory_lower_curve(double lambda, HurstParam hurst, double alpha, double c2, double c4) {
  const double r = theory_optimal_r(lambda, hurst, alpha, c2, c4);
  const double kappa = 2.0 * alpha / (1.0 - 2.0 * hurst.h);
  const double f = c2 * lambda * lambda / r + c4 * std::pow(r, kappa);
  return std::exp(-f);
}

double theory_exponent(HurstParam hurst, double alpha) {
  return 4.0 * alpha / (1.0 + 2.0 * alpha - 2.0 * hurst.h);
}

SmallBallResult smallball_probe(const GaussianGridModel& model, double delta,
                                std::span<const double> xs, std::int64_t n, std::uint64_t seed,
                                std::uint64_t stream_base, int threads) {
  if (!(delta > 0.0 && delta < model.hurst.h)) {
    throw ConfigError("smallball_probe requires 0 < delta < H");
  }
  for (double x : xs) {
    if (!(x > 0.0 && x <= 1.0)) throw ConfigError("smallball_probe requires x in (0,1]");
  }
  const double gamma = model.hurst.h - delta;
  std::vector<double> norms(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](std::int64_t i) {
    RngStream rng(seed, stream_base + static_cast<std::uint64_t>(i));
    norms[static_cast<std::size_t>(i)] = holder_norm(sample_fbm(model, rng), gamma);
  });

  SmallBallResult res;
  // p_hat per probe on the full sample set plus on each disjoint half; the
  // half fits give the split-sample stability of the fitted constant.
  auto survey = [&](std::size_t lo, std::size_t hi) {
    std::vector<SmallBallPoint> pts;
    const double nn = static_cast<double>(hi - lo);
    for (double x : xs) {
      SmallBallPoint pt;
      pt.x = x;
      pt.threshold = std::pow(x, delta);
      std::int64_t hits = 0;
      for (std::size_t i = lo; i < hi; ++i) {
        if (norms[i] <= pt.threshold) ++hits;
      }
      pt.p_hat = static_cast<double>(hits) / nn;
      pt.stderr_ = std::sqrt(pt.p_hat * (1.0 - pt.p_hat) / nn);
      pts.push_back(pt);
    }
    return pts;
  };
  // log p = -C/x through the origin: C = -sum(y z)/sum(z^2), z = 1/x.
  auto fit_c = [](std::span<const SmallBallPoint> pts) {
    double num = 0.0, den = 0.0;
    for (const auto& p : pts) {
      if (p.p_hat <= 0.0) continue;
      const double z = 1.0 / p.x;
      num += std::log(p.p_hat) * z;
      den += z * z;
    }
    return den > 0.0 ? -num / den : 0.0;
  };

  res.points = survey(0, norms.size());
  res.c_fit = fit_c(res.points);
  const std::size_t half = norms.size() / 2;
  res.c_first_half = fit_c(survey(0, half));
  res.c_second_half = fit_c(survey(half, norms.size()));
  res.c_positive = res.c_fit > 0.0;
  if (res.c_fit != 0.0) {
    res.split_rel_spread = std::abs(res.c_first_half - res.c_second_half) / std::abs(res.c_fit);
  }
  return res;
}

double gaussian_tail_lower(double r) { return gaussian_two_sided_tail(r); }

}  // namespace roughtail
