#include "roughtail/weierstrass.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace roughtail {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

void require_certified(double t, const WeierstrassParams& p) {
  if (!(std::abs(t) <= p.t_max)) {
    throw ConfigError("Weierstrass window certified only for |t| <= " + std::to_string(p.t_max) +
                      ", got t = " + std::to_string(t));
  }
  if (p.n_pos <= 0 || p.n_neg > 0) {
    throw ConfigError("WeierstrassParams window not initialised; use certified()");
  }
}

}  // namespace

WeierstrassParams WeierstrassParams::certified(double alpha, double tol, double t_max) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("Weierstrass alpha must lie in (0,1)");
  if (!(tol > 0.0) || !(t_max > 0.0)) throw ConfigError("Weierstrass tol and t_max must be > 0");
  WeierstrassParams p;
  p.alpha = alpha;
  p.tol = tol;
  p.t_max = t_max;

  const double half = tol / 2.0;
  int npos = 1;
  while (std::pow(2.0, -(npos + 1) * alpha) / (1.0 - std::pow(2.0, -alpha)) > half) {
    ++npos;
    if (npos > 4096) throw NumericalError("Weierstrass positive window did not certify");
  }
  int nneg = 0;
  const double neg_denom = 1.0 - std::pow(2.0, -(1.0 - alpha));
  while (kPi * t_max * std::pow(2.0, (nneg - 1) * (1.0 - alpha)) / neg_denom > half) {
    --nneg;
    if (nneg < -65536) throw NumericalError("Weierstrass negative window did not certify");
  }
  p.n_pos = npos;
  p.n_neg = nneg;
  return p;
}

double eval_h(double t, const WeierstrassParams& p) {
  require_certified(t, p);
  double sum = 0.0, comp = 0.0;
  for (int n = p.n_neg; n <= p.n_pos; ++n) {
    const double term = std::pow(2.0, -n * p.alpha) * std::sin(std::ldexp(kPi, n) * t);
    const double s = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      comp += (sum - s) + term;
    } else {
      comp += (term - s) + sum;
    }
    sum = s;
  }
  return sum + comp;
}

FgPair eval_f_g(double t, const WeierstrassParams& p) {
  require_certified(t, p);
  FgPair out;
  for (int n = p.n_neg; n <= 0; ++n) {
    out.f += std::pow(2.0, -n * p.alpha) * std::sin(std::ldexp(kPi, n) * t);
  }
  for (int n = 1; n <= p.n_pos; ++n) {
    out.g += std::pow(2.0, -n * p.alpha) * std::sin(std::ldexp(kPi, n) * t);
  }
  return out;
}

std::vector<double> weierstrass_values(const WeierstrassParams& p, std::span<const double> ts) {
  double worst = 0.0;
  for (double t : ts) worst = std::max(worst, std::abs(t));
  require_certified(worst, p);
  std::vector<double> out(ts.size(), 0.0);
  for (int n = p.n_neg; n <= p.n_pos; ++n) {
    const double amp = std::pow(2.0, -n * p.alpha);
    const double freq = std::ldexp(kPi, n);
    for (std::size_t k = 0; k < ts.size(); ++k) out[k] += amp * std::sin(freq * ts[k]);
  }
  return out;
}

GridPath discretize_weierstrass(const WeierstrassParams& p, int level) {
  std::vector<double> ts(grid_size(level));
  const double h = 1.0 / static_cast<double>(std::size_t{1} << level);
  for (std::size_t k = 0; k < ts.size(); ++k) ts[k] = static_cast<double>(k) * h;
  std::vector<double> vals = weierstrass_values(p, ts);
  vals[0] = 0.0;  // exact: every term vanishes at t = 0
  return make_grid_path(level, std::move(vals), true);
}

double lipschitz_bound(const WeierstrassParams& p) {
  return kPi / (1.0 - std::pow(2.0, -(1.0 - p.alpha)));
}

double g_at_dyadic(int m, double alpha) {
  if (m < 1) throw ConfigError("g_at_dyadic requires m >= 1");
  double sum = 0.0;
  for (int n = 1; n < m; ++n) {
    sum += std::pow(2.0, -n * alpha) * std::sin(std::ldexp(kPi, n - m));
  }
  return sum;
}

OscillationSeed lower_holder_seed(const WeierstrassParams& p, int m_limit) {
  const double lip = lipschitz_bound(p);
  for (int m = 1; m <= m_limit; ++m) {
    const double t = std::ldexp(1.0, -m);
    if (std::abs(g_at_dyadic(m, p.alpha)) >= 2.0 * lip * t) {
      return {m, t};
    }
  }
  throw NumericalError("no dyadic point with |g| >= 2 L t found up to m = " +
                       std::to_string(m_limit));
}

double holder_constant_probe(const WeierstrassParams& p, int n_pairs) {
  if (n_pairs < 1) throw ConfigError("holder_constant_probe requires n_pairs >= 1");
  constexpr int kScales = 20;
  // Power-of-two offsets per scale keep the lattice nested under doubling,
  // so the probed maximum is nondecreasing in n_pairs.
  int per_scale = 1;
  while (2 * per_scale <= n_pairs / kScales) per_scale *= 2;
  double best = 0.0;
  for (int j = 0; j < kScales; ++j) {
    const double u = std::ldexp(1.0, -j);
    const double u_pow = std::pow(u, -p.alpha);
    for (int i = 0; i < per_scale; ++i) {
      const double t = (1.0 - u) * static_cast<double>(i) / static_cast<double>(per_scale);
      const double d = eval_f_g(t + u, p).g - eval_f_g(t, p).g;
      best = std::max(best, std::abs(d) * u_pow);
    }
  }
  return best;
}

EtaProbe nondeg_eta(const PhiSpec& phi, double r, int grid_per_unit) {
  if (!(r > 0.0)) throw ConfigError("nondeg_eta requires window length r > 0");
  if (grid_per_unit < 2) throw ConfigError("nondeg_eta grid resolution too coarse");
  EtaProbe out;
  if (phi.period) {
    out.probe_lo = 0.0;
    out.probe_hi = *phi.period;
  } else {
    out.probe_lo = -16.0;
    out.probe_hi = 16.0;
  }
  const double step = 1.0 / static_cast<double>(grid_per_unit);
  const std::size_t n_x = static_cast<std::size_t>(
      std::ceil((out.probe_hi - out.probe_lo) / step));
  const std::size_t w = static_cast<std::size_t>(std::floor(r / step)) + 1;
  const std::size_t n_total = n_x + w;

  // Sliding-window maximum of |phi'| via monotone deque.
  std::deque<std::size_t> q;
  auto val = [&](std::size_t i) {
    return std::abs(phi.deriv(out.probe_lo + static_cast<double>(i) * step));
  };
  double eta = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_total; ++i) {
    const double v = val(i);
    while (!q.empty() && val(q.back()) <= v) q.pop_back();
    q.push_back(i);
    if (i + 1 >= w) {
      const std::size_t start = i + 1 - w;
      while (q.front() < start) q.pop_front();
      if (start < n_x) eta = std::min(eta, val(q.front()));
    }
  }
  out.eta = eta;
  return out;
}

OscillationScan compute_rho(const WeierstrassParams& p, double r, int k_max, int grid_per_unit) {
  if (k_max < 8) throw ConfigError("compute_rho requires k_max >= 8");
  if (!(r > 0.0)) throw ConfigError("compute_rho requires r > 0");
  OscillationScan scan;
  scan.r = r;
  scan.grid_per_unit = grid_per_unit;
  scan.osc_per_k.reserve(k_max);

  std::vector<double> ts(static_cast<std::size_t>(grid_per_unit) + 1);
  double d_min = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_max; ++k) {
    for (std::size_t j = 0; j < ts.size(); ++j) {
      ts[j] = static_cast<double>(k) +
              static_cast<double>(j) / static_cast<double>(grid_per_unit);
    }
    const std::vector<double> vals = weierstrass_values(p, ts);
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    const double osc = *hi - *lo;
    scan.osc_per_k.push_back(osc);
    d_min = std::min(d_min, osc);
  }
  if (!(d_min > 1e-12)) {
    throw NumericalError("degenerate Weierstrass oscillation (d_min = " + std::to_string(d_min) +
                         "); this indicates a bug, not a valid state");
  }
  scan.d_min = d_min;
  scan.rho = std::pow(2.0, p.alpha) * r / d_min;
  return scan;
}

NonDegData make_nondeg_data(const PhiSpec& phi, const WeierstrassParams& p, double r, int k_max,
                            int grid_per_unit) {
  NonDegData data;
  data.r = r;
  data.eta = nondeg_eta(phi, r, grid_per_unit).eta;
  data.rho = compute_rho(p, r, k_max, grid_per_unit).rho;
  return data;
}

bool check_localization_params(HurstParam hurst, double alpha, double delta, double eps,
                               double sigma, double beta) {
  const double h = hurst.h;
  if (!(delta > 0.0 && delta < 2.0 * h - 0.5)) return false;
  if (!(eps > 0.0 && eps < 1.0)) return false;
  if (!(eps / delta < 2.0)) return false;
  const double sigma_lo = std::max((1.0 + delta - 3.0 * h) / alpha, 0.0);
  const double sigma_hi = (1.0 - 2.0 * h) / alpha;
  if (!(sigma > sigma_lo && sigma < sigma_hi)) return false;
  const double beta_lo = (1.0 - 2.0 * h) / (2.0 * alpha);
  const double beta_hi = (1.0 - 2.0 * h) / ((2.0 - eps) * alpha);
  return beta > beta_lo && beta < beta_hi;
}

int composition_dyadic_level(const WeierstrassParams& p, double holder_const, double eta,
                             double rho, double sup_ddphi, int m_limit) {
  if (!(eta > 0.0) || !(rho > 0.0)) {
    throw ConfigError("composition_dyadic_level requires eta > 0 and rho > 0");
  }
  const double threshold = eta / (4.0 * (sup_ddphi + 1.0) * rho);
  const double lip = lipschitz_bound(p);
  for (int m = 1; m <= m_limit; ++m) {
    const double eps = std::ldexp(1.0, -m);
    if (lip * eps + holder_const * std::pow(eps, p.alpha) < threshold) return m;
  }
  throw NumericalError("no admissible dyadic composition scale up to 2^-" +
                       std::to_string(m_limit));
}

}  // namespace roughtail
