#include <doctest.h>

#include <cmath>

#include "roughtail/rng.hpp"
#include "roughtail/weierstrass.hpp"

using namespace roughtail;

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

TEST_CASE("certified window and exact zero at the origin") {
  const WeierstrassParams p = WeierstrassParams::certified(0.9, 1e-10, 2.0);
  CHECK(p.n_pos > 0);
  CHECK(p.n_neg < 0);
  CHECK(eval_h(0.0, p) == 0.0);
  CHECK_THROWS_AS(eval_h(3.0, p), ConfigError);  // beyond the certified domain
}

TEST_CASE("h(1) for alpha = 0.8 matches the extended-precision oracle") {
  // sum_{m>=1} 2^{0.8 m} sin(pi 2^-m), 50-digit summation
  const WeierstrassParams p = WeierstrassParams::certified(0.8, 1e-10, 2.0);
  CHECK(eval_h(1.0, p) == doctest::Approx(19.828478089136360).epsilon(1e-10));
}

TEST_CASE("scaling identity h(2^m t) = 2^{m a} h(t) within certified error") {
  const WeierstrassParams p = WeierstrassParams::certified(0.9, 1e-10, 16.0);
  RngStream rng(11, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const double t = rng.uniform01();
    for (int m = -3; m <= 3; ++m) {
      const double s = std::ldexp(1.0, m);
      const double lhs = eval_h(s * t, p);
      const double rhs = std::pow(s, p.alpha) * eval_h(t, p);
      CHECK(std::abs(lhs - rhs) <= (std::pow(s, p.alpha) + 1.0) * p.tol);
    }
  }
}

TEST_CASE("decomposition, periodicity, and the Lipschitz part") {
  const WeierstrassParams p = WeierstrassParams::certified(0.9, 1e-10, 4.0);
  RngStream rng(13, 0);
  const double lip = lipschitz_bound(p);
  for (int rep = 0; rep < 100; ++rep) {
    const double t = rng.uniform01();
    const FgPair fg = eval_f_g(t, p);
    CHECK(std::abs(fg.f + fg.g - eval_h(t, p)) <= 2.0 * p.tol);
    CHECK(std::abs(eval_f_g(t + 1.0, p).g - fg.g) <= 2.0 * p.tol);

    const double s = rng.uniform01();
    CHECK(std::abs(eval_f_g(s, p).f - fg.f) <= lip * std::abs(s - t) + 2.0 * p.tol);
  }
}

TEST_CASE("Lipschitz bound holds on a dense pair probe") {
  const WeierstrassParams p = WeierstrassParams::certified(0.85, 1e-10, 2.0);
  const double lip = lipschitz_bound(p);
  RngStream rng(17, 0);
  for (int rep = 0; rep < 10000; ++rep) {
    const double t = rng.uniform01();
    const double s = rng.uniform01();
    const double df = eval_f_g(t, p).f - eval_f_g(s, p).f;
    CHECK(std::abs(df) <= lip * std::abs(t - s) + 2.0 * p.tol);
  }
}

TEST_CASE("dyadic lower bound g(2^-m) >= 2^{-(m-1)a}") {
  // The inequality comes from keeping the n = m-1 term of a sum that is empty
  // at m = 1 (g(1/2) = 0), so the probe starts at m = 2.
  const double alpha = 0.9;
  const WeierstrassParams p = WeierstrassParams::certified(alpha, 1e-10, 2.0);
  CHECK(g_at_dyadic(1, alpha) == 0.0);
  for (int m = 2; m <= 12; ++m) {
    const double g = g_at_dyadic(m, alpha);
    CHECK(g >= std::pow(2.0, -(m - 1) * alpha) - 1e-12);
    // exact finite sum agrees with the truncated series evaluation
    CHECK(std::abs(g - eval_f_g(std::ldexp(1.0, -m), p).g) <= 2.0 * p.tol);
  }
}

TEST_CASE("lower_holder_seed finds the dominating dyadic point") {
  const WeierstrassParams p = WeierstrassParams::certified(0.9, 1e-10, 2.0);
  const OscillationSeed seed = lower_holder_seed(p);
  CHECK(seed.m >= 1);
  CHECK(seed.v0 == std::ldexp(1.0, -seed.m));
  CHECK(std::abs(g_at_dyadic(seed.m, p.alpha)) >= 2.0 * lipschitz_bound(p) * seed.v0);
}

TEST_CASE("holder_constant_probe is finite and stable under doubling") {
  const WeierstrassParams p = WeierstrassParams::certified(0.9, 1e-10, 2.0);
  const double c1 = holder_constant_probe(p, 1 << 12);
  const double c2 = holder_constant_probe(p, 1 << 13);
  CHECK(std::isfinite(c1));
  CHECK(c1 > 0.0);
  CHECK(c2 >= c1);  // nested lattice
  CHECK((c2 - c1) / c1 < 0.10);

  // single-pair ratios at (0, 2^-m) stay >= 1 (empty-sum point m = 1 aside)
  for (int m = 2; m <= 12; ++m) {
    const double ratio = g_at_dyadic(m, p.alpha) / std::pow(std::ldexp(1.0, -m), p.alpha);
    CHECK(ratio >= 1.0);
  }

  // a zero function probes to zero
  double zero_ratio = 0.0;
  for (int j = 0; j < 20; ++j) {
    const double u = std::ldexp(1.0, -j);
    zero_ratio = std::max(zero_ratio, std::abs(0.0 - 0.0) / std::pow(u, p.alpha));
  }
  CHECK(zero_ratio == 0.0);
}

TEST_CASE("nondeg_eta for the sine family") {
  const PhiSpec sine = phi_sine(1.0, 0.0);
  CHECK(nondeg_eta(sine, kPi / 2).eta == doctest::Approx(std::sqrt(0.5)).epsilon(2e-3));
  CHECK(nondeg_eta(sine, kPi).eta == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(nondeg_eta(phi_const(3.0), 1.0).eta == doctest::Approx(0.0));

  double prev = 0.0;
  for (double r : {0.5, 1.0, 2.0, 3.0}) {
    const double eta = nondeg_eta(sine, r).eta;
    CHECK(eta >= prev - 1e-12);
    prev = eta;
  }

  const EtaProbe id_probe = nondeg_eta(phi_identity(), 1.0);
  CHECK(id_probe.eta == doctest::Approx(1.0));
  CHECK(id_probe.probe_hi > id_probe.probe_lo);  // reports the domain it used
}

TEST_CASE("compute_rho: linearity in r, refinement stability, seed bound") {
  const WeierstrassParams p = WeierstrassParams::certified(0.9, 1e-10, 16.0);
  const OscillationScan s1 = compute_rho(p, 1.0, 8, 1 << 12);
  const OscillationScan s2 = compute_rho(p, 2.0, 8, 1 << 12);
  CHECK(s2.rho == doctest::Approx(2.0 * s1.rho).epsilon(1e-14));

  const OscillationScan fine = compute_rho(p, 1.0, 8, 1 << 14);
  CHECK(std::abs(fine.d_min - s1.d_min) / fine.d_min < 0.05);

  const OscillationSeed seed = lower_holder_seed(p);
  CHECK(s1.d_min >= lipschitz_bound(p) * seed.v0);

  CHECK_THROWS_AS(compute_rho(p, 1.0, 4), ConfigError);
}

TEST_CASE("check_localization_params constraint set") {
  const HurstParam h(0.35);
  // sigma must exceed (1 + delta - 3H)/alpha = 0.111..., so 0.2 passes and
  // 0.1 does not.
  CHECK(check_localization_params(h, 0.9, 0.15, 0.25, 0.2, 0.18));
  CHECK_FALSE(check_localization_params(h, 0.9, 0.15, 0.25, 0.1, 0.18));
  CHECK_FALSE(check_localization_params(h, 0.9, 2 * 0.35 - 0.5, 0.25, 0.2, 0.18));
  CHECK_FALSE(check_localization_params(h, 0.9, 0.15, 0.30, 0.2, 0.18));  // eps/delta = 2
  CHECK_FALSE(check_localization_params(h, 0.9, 0.15, 0.25, 0.2, 0.30));  // beta too large
}

TEST_CASE("Jordan inequality on [0, pi/2]") {
  for (int i = 0; i <= 1000; ++i) {
    const double x = (kPi / 2) * i / 1000.0;
    CHECK(std::sin(x) >= (2.0 / kPi) * x - 1e-15);
  }
}

TEST_CASE("composition scale diagnostic is admissible and minimal") {
  const WeierstrassParams p = WeierstrassParams::certified(0.9, 1e-10, 16.0);
  const PhiSpec sine = phi_sine(1.0, 0.0);
  const NonDegData nd = make_nondeg_data(sine, p, kPi);
  CHECK(nd.eta == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(nd.rho > 0.0);

  const double lp = holder_constant_probe(p, 1 << 12);
  const int m = composition_dyadic_level(p, lp, nd.eta, nd.rho, sine.sup_deriv2);
  CHECK(m >= 1);
  CHECK(m <= 40);
  const double thr = nd.eta / (4.0 * (sine.sup_deriv2 + 1.0) * nd.rho);
  const double eps = std::ldexp(1.0, -m);
  CHECK(lipschitz_bound(p) * eps + lp * std::pow(eps, p.alpha) < thr);
  if (m > 1) {
    const double eps2 = std::ldexp(1.0, -(m - 1));
    CHECK_FALSE(lipschitz_bound(p) * eps2 + lp * std::pow(eps2, p.alpha) < thr);
  }
}
