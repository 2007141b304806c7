#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "roughtail/common.hpp"
#include "roughtail/fbm.hpp"
#include "roughtail/functionals.hpp"
#include "roughtail/phi.hpp"
#include "roughtail/weierstrass.hpp"

namespace roughtail {

enum class TailFunctional {
  kCondVar,      // conditional variance of the line integral given the path
  kEnergy,       // simplex energy alone
  kLineIntegral  // |int phi(X) dY|, sampling both coordinates
};

std::string to_string(TailFunctional f);

struct TailEstimate {
  double lambda = 0.0;
  double p_hat = 0.0;
  double stderr_ = 0.0;
  std::string method;  // "plain-mc" | "cm-tilted" | "assembled-cond-gauss"
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
  double ess = 0.0;  // == n_samples for unweighted estimators
  std::int64_t hits = 0;
  double max_log_weight = 0.0;
  bool suggest_tilted = false;        // no hits seen; plain MC cannot resolve
  double p_upper_rule_of_three = 0.0; // one-sided bound reported when p_hat = 0
};

struct ExponentFit {
  double gamma_hat = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double gamma_stderr = 0.0;      // delta-method propagation of p_hat stderr
  double gamma_stderr_ols = 0.0;  // residual-based
  std::size_t n_used = 0;
  std::size_t n_excluded = 0;     // p_hat in {0,1} dropped with a warning
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
};

/// J(lambda * rho * h) for each lambda, discretised on the quadrature grid.
std::vector<std::pair<double, QuadValue>> scaling_sweep(const WeierstrassParams& p, double rho,
                                                        const PhiSpec& phi, HurstParam hurst,
                                                        const std::vector<double>& lambdas,
                                                        const QuadratureConfig& q);

/// One functional value per sample (stream_base + i), reusable across
/// thresholds; this is what makes common-random-number monotonicity exact.
std::vector<double> sample_functional_batch(const GaussianGridModel& model, const PhiSpec& phi,
                                            TailFunctional functional, std::int64_t n,
                                            std::uint64_t seed, std::uint64_t stream_base,
                                            int cells_level, int threads);

TailEstimate plain_estimate_from_batch(std::span<const double> values, double lambda,
                                       std::uint64_t seed);

/// Plain Monte Carlo estimate of P(functional > lambda) (absolute value for
/// the line integral). Functionals are evaluated at cells_level (< 1 means
/// model.level - 1). One stream per sample.
TailEstimate mc_tail(const GaussianGridModel& model, const PhiSpec& phi, TailFunctional functional,
                     double lambda, std::int64_t n, std::uint64_t seed, std::uint64_t stream_base,
                     int cells_level, int threads);

struct TiltedBatch {
  std::vector<double> values;
  std::vector<double> log_weights;
};

TiltedBatch sample_tilted_batch(const GaussianGridModel& model, const PhiSpec& phi,
                                const GridPath& shift, TailFunctional functional, std::int64_t n,
                                std::uint64_t seed, std::uint64_t stream_base, int cells_level,
                                int threads);

TailEstimate tilted_estimate_from_batch(const TiltedBatch& batch, double lambda,
                                        std::uint64_t seed);

/// Importance-sampled estimate under the mean shift: X = shift + Z with
/// Z ~ N(0,Sigma), reweighted by exp(shift_log_density_ratio). Unbiased for
/// the plain probability; weights are handled in log space and the effective
/// sample size (sum w)^2 / sum w^2 is reported.
TailEstimate cm_tilted_tail(const GaussianGridModel& model, const PhiSpec& phi,
                            const GridPath& shift, TailFunctional functional, double lambda,
                            std::int64_t n, std::uint64_t seed, std::uint64_t stream_base,
                            int cells_level, int threads);

/// log(-log p) ~ gamma log(lambda) + c over the estimates, after excluding
/// p in {0,1} and dropping the smallest drop_frac of the lambda range
/// (pre-asymptotic bias guard). Requires >= 4 usable points.
ExponentFit fit_weibull_exponent(std::span<const TailEstimate> estimates, double drop_frac = 0.25);

/// Closed-form minimiser of f(r) = c2 lambda^2 / r + c4 r^{2a/(1-2H)}.
double theory_optimal_r(double lambda, HurstParam hurst, double alpha, double c2, double c4);

/// exp(-f(r*)); log decays like lambda^{4a/(1+2a-2H)}.
double theory_lower_curve(double lambda, HurstParam hurst, double alpha, double c2, double c4);

/// The Weibull exponent the optimisation yields.
double theory_exponent(HurstParam hurst, double alpha);

struct SmallBallPoint {
  double x = 0.0;
  double threshold = 0.0;  // x^delta
  double p_hat = 0.0;
  double stderr_ = 0.0;
};

struct SmallBallResult {
  std::vector<SmallBallPoint> points;
  double c_fit = 0.0;          // log p >= -C/x, least squares through the origin
  double c_first_half = 0.0;
  double c_second_half = 0.0;
  bool c_positive = false;
  double split_rel_spread = 0.0;
};

/// Monte Carlo of P(||X||_{H-delta} <= x^delta) across the probe list with
/// common random numbers (one Holder norm per sample, all thresholds share it).
SmallBallResult smallball_probe(const GaussianGridModel& model, double delta,
                                std::span<const double> xs, std::int64_t n, std::uint64_t seed,
                                std::uint64_t stream_base, int threads);

/// Exact standard-normal two-sided tail 2(1 - Phi(r)) = erfc(r/sqrt 2).
double gaussian_tail_lower(double r);

namespace detail {
/// Golden-section minimiser used to cross-check theory_optimal_r.
double minimize_golden(const std::function<double(double)>& f, double lo, double hi,
                       double tol = 1e-12);
/// Functional evaluation shared by the tail estimators.
double eval_tail_functional(const GridPath& x, const PhiSpec& phi, HurstParam hurst,
                            TailFunctional functional, int cells_level);
}  // namespace detail

}  // namespace roughtail
