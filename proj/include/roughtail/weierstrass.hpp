#pragma once

#include <span>
#include <vector>

#include "roughtail/common.hpp"
#include "roughtail/grid_path.hpp"
#include "roughtail/phi.hpp"

namespace roughtail {

/// Lacunary sine series h(t) = sum_n 2^{-n*alpha} sin(2^n pi t) with a
/// truncation window certified against an absolute tolerance on a declared
/// |t| domain. The n <= 0 part is Lipschitz, the n >= 1 part is 1-periodic
/// and alpha-Holder; h scales as h(2^m t) = 2^{m*alpha} h(t).
struct WeierstrassParams {
  double alpha = 0.9;
  double tol = 1e-10;
  double t_max = 1048576.0;  // declared |t| domain for the certified window
  int n_neg = 0;             // most negative retained index
  int n_pos = 0;             // most positive retained index

  /// Choose the window from the geometric tail bounds:
  ///   sum_{n > n_pos} 2^{-n a}               <= tol/2
  ///   sum_{n < n_neg} pi |t| 2^{n(1-a)}      <= tol/2  for |t| <= t_max.
  static WeierstrassParams certified(double alpha, double tol = 1e-10, double t_max = 1048576.0);
};

double eval_h(double t, const WeierstrassParams& p);

struct FgPair {
  double f = 0.0;  // n <= 0 partial sum (Lipschitz part)
  double g = 0.0;  // n >= 1 partial sum (periodic Holder part)
};
FgPair eval_f_g(double t, const WeierstrassParams& p);

/// Batch evaluation (term-outer loop); same certified window as eval_h.
std::vector<double> weierstrass_values(const WeierstrassParams& p, std::span<const double> ts);

/// h on the dyadic grid of [0,1].
GridPath discretize_weierstrass(const WeierstrassParams& p, int level);

/// Closed-form Lipschitz constant of the n <= 0 part: pi / (1 - 2^{-(1-a)}).
double lipschitz_bound(const WeierstrassParams& p);

/// Exact finite sum g(2^-m) = sum_{n=1}^{m-1} 2^{-n a} sin(2^{n-m} pi);
/// terms with n >= m vanish identically and are not evaluated.
double g_at_dyadic(int m, double alpha);

/// First m >= 1 with g(2^-m) >= 2 L 2^-m, i.e. the dyadic point where the
/// periodic part dominates the Lipschitz part. Returns {m, v0 = 2^-m}.
struct OscillationSeed {
  int m = 0;
  double v0 = 0.0;
};
OscillationSeed lower_holder_seed(const WeierstrassParams& p, int m_limit = 64);

/// Max of |g(t+u)-g(t)| / u^alpha over a deterministic nested probe lattice
/// (dyadic scales u, ~n_pairs/20 offsets per scale). Doubling n_pairs refines
/// the lattice, so the value is nondecreasing in n_pairs.
double holder_constant_probe(const WeierstrassParams& p, int n_pairs);

/// min over probed window starts x of max_{y in [x, x+r]} |phi'(y)|.
/// Periodic phi is probed over one period (exact up to grid resolution);
/// otherwise the probe domain below is used and reported back.
struct EtaProbe {
  double eta = 0.0;
  double probe_lo = 0.0;
  double probe_hi = 0.0;
};
EtaProbe nondeg_eta(const PhiSpec& phi, double r, int grid_per_unit = 4096);

/// Unit-window oscillation scan of h over [k, k+1], k = 1..k_max, on a
/// v-grid of grid_per_unit points; d_min = min_k (max - min) and
/// rho = 2^alpha * r / d_min.
struct OscillationScan {
  double d_min = 0.0;
  double rho = 0.0;
  std::vector<double> osc_per_k;
  double r = 0.0;
  int grid_per_unit = 0;
};
OscillationScan compute_rho(const WeierstrassParams& p, double r, int k_max,
                            int grid_per_unit = 4096);

/// Assemble the full non-degeneracy record for phi against this series.
NonDegData make_nondeg_data(const PhiSpec& phi, const WeierstrassParams& p, double r, int k_max = 8,
                            int grid_per_unit = 4096);

/// Localisation parameter feasibility:
///   0 < delta < 2H - 1/2,   0 < eps < 1,   eps/delta < 2,
///   max{(1 + delta - 3H)/alpha, 0} < sigma < (1-2H)/alpha,
///   (1-2H)/(2 alpha) < beta < (1-2H)/((2-eps) alpha).
bool check_localization_params(HurstParam hurst, double alpha, double delta, double eps,
                               double sigma, double beta);

/// Smallest dyadic level M with L 2^-M + L' 2^{-M alpha} below the
/// composition threshold eta / (4 (sup|phi''| + 1) rho). Diagnostic only.
int composition_dyadic_level(const WeierstrassParams& p, double holder_const, double eta,
                             double rho, double sup_ddphi, int m_limit = 64);

}  // namespace roughtail
