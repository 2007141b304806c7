#include <doctest.h>

#include <cmath>

#include "roughtail/fbm.hpp"
#include "roughtail/functionals.hpp"
#include "roughtail/roughint.hpp"
#include "roughtail/rng.hpp"

using namespace roughtail;

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

TEST_CASE("dyadic_interp: identity, chord, projection") {
  const GaussianGridModel model = build_model(8, HurstParam(0.35));
  RngStream rng(3, 0);
  const GridPath x = sample_fbm(model, rng);

  CHECK(dyadic_interp(x, 8).values == x.values);

  const GridPath chord = dyadic_interp(x, 0);
  for (std::size_t k = 0; k < chord.values.size(); ++k) {
    const double t = chord.time_at(k);
    CHECK(chord.values[k] == doctest::Approx(t * x.values.back()).epsilon(1e-13));
  }

  const GridPath once = dyadic_interp(x, 3);
  CHECK(dyadic_interp(once, 3).values == once.values);

  CHECK_THROWS_AS(dyadic_interp(x, 9), ConfigError);
}

TEST_CASE("piecewise-linear interpolation error bound in Holder norm") {
  const HurstParam h(0.4);
  const GaussianGridModel model = build_model(9, h);
  const double gamma = h.h - 0.02;
  const double beta = gamma / 2.0;
  for (int s = 0; s < 10; ++s) {
    RngStream rng(41, s);
    const GridPath x = sample_fbm(model, rng);
    const double xg = holder_norm(x, gamma);
    for (int m : {2, 4, 6}) {
      const GridPath diff = axpby(1.0, dyadic_interp(x, m), -1.0, x);
      const double lhs = holder_norm(diff, beta);
      CHECK(lhs <= 4.0 * std::pow(std::ldexp(1.0, -m), gamma - beta) * xg);
    }
  }
}

TEST_CASE("rs_integral exact cases") {
  const GaussianGridModel model = build_model(7, HurstParam(0.35));
  RngStream rng(9, 0);
  const GridPath x = sample_fbm(model, rng);
  const GridPath y = sample_fbm(model, rng);

  CHECK(rs_integral(x, y, phi_const(1.0), 7) ==
        doctest::Approx(y.values.back() - y.values.front()).epsilon(1e-13));

  const GridPath half_pi = discretize([](double) { return kPi / 2; }, 7);
  CHECK(rs_integral(half_pi, y, phi_sine(1.0, 0.0), 7) ==
        doctest::Approx(y.values.back() - y.values.front()).epsilon(1e-13));

  for (int m : {2, 5, 7}) {
    CHECK(rs_integral(x, x, phi_identity(), m) ==
          doctest::Approx(0.5 * (x.values.back() * x.values.back())).epsilon(1e-12));
  }

  const GridPath coarse = subsample(x, 5);
  CHECK_THROWS_AS(rs_integral(x, coarse, phi_const(1.0), 5), ConfigError);
  CHECK_THROWS_AS(rs_integral(x, y, phi_const(1.0), 8), ConfigError);
}

TEST_CASE("rs_integral is linear in y and odd under reversal") {
  const GaussianGridModel model = build_model(6, HurstParam(0.4));
  RngStream rng(11, 0);
  const GridPath x = sample_fbm(model, rng);
  const GridPath y1 = sample_fbm(model, rng);
  const GridPath y2 = sample_fbm(model, rng);
  const PhiSpec sine = phi_sine(2.0, 0.5);

  const double a = -1.3, b = 0.7;
  const double lhs = rs_integral(x, axpby(a, y1, b, y2), sine, 6);
  const double rhs = a * rs_integral(x, y1, sine, 6) + b * rs_integral(x, y2, sine, 6);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

  CHECK(rs_integral(x, scale(y1, -1.0), sine, 6) ==
        doctest::Approx(-rs_integral(x, y1, sine, 6)).epsilon(1e-13));
}

TEST_CASE("integral ladder: constants, deterministic path, decay") {
  const GaussianGridModel model = build_model(10, HurstParam(0.4));
  RngStream rng(13, 1);
  const GridPath x = sample_fbm(model, rng);
  const GridPath y = sample_fbm(model, rng);

  const DyadicLadder flat = integral_ladder(x, y, phi_const(2.5), {2, 4, 6, 8, 10});
  for (double v : flat.integrals) {
    CHECK(v == doctest::Approx(2.5 * (y.values.back() - y.values.front())).epsilon(1e-13));
  }

  const GridPath lin = discretize([](double t) { return t; }, 10, true);
  const DyadicLadder tri = integral_ladder(lin, lin, phi_identity(), {3, 5, 7});
  for (double v : tri.integrals) CHECK(v == doctest::Approx(0.5).epsilon(1e-14));

  // Cauchy-style decay certificate aggregated over 50 seeds: per-path
  // differences are noisy, but their means contract clearly.
  std::vector<double> diff_sums(6, 0.0);
  for (int s = 0; s < 50; ++s) {
    RngStream r2(14, s);
    const GridPath xs = sample_fbm(model, r2);
    const GridPath ys = sample_fbm(model, r2);
    const DyadicLadder lad = integral_ladder(xs, ys, phi_sine(1.0, 0.0), {4, 5, 6, 7, 8, 9, 10});
    for (std::size_t i = 0; i < diff_sums.size(); ++i) diff_sums[i] += lad.successive_diffs[i];
  }
  const double late = std::max(diff_sums[4], diff_sums[5]);
  CHECK(late < diff_sums[0]);
  CHECK(late < diff_sums[1]);
}

TEST_CASE("conditional variance MC: trivial law of Y_1 and normality stats") {
  const GridPath x = discretize([](double t) { return t; }, 8, true);
  const CondVarResult res = conditional_variance_mc(x, phi_const(1.0), HurstParam(0.35), 8, 5000,
                                                    99, 0, 10, 2);
  // integral == Y_1 ~ N(0,1) exactly
  CHECK(std::abs(res.second_moment - 1.0) <= 4.0 * res.second_moment_stderr);
  CHECK(std::abs(res.mean) <= 4.0 * res.mean_stderr);
  CHECK(std::abs(res.skewness) <= 5.0 * res.skewness_stderr);
  CHECK(std::abs(res.excess_kurtosis) <= 5.0 * res.kurtosis_stderr);

  CHECK_THROWS_AS(conditional_variance_mc(x, phi_const(1.0), HurstParam(0.35), 8, 500, 1, 0, 10, 1),
                  ConfigError);
  CHECK_THROWS_AS(conditional_variance_mc(x, phi_const(1.0), HurstParam(0.35), 8, 5000, 1, 0, 6, 1),
                  ConfigError);
}

TEST_CASE("conditional variance MC is independent of the worker count") {
  const GaussianGridModel model = build_model(7, HurstParam(0.3));
  RngStream rng(5, 2);
  const GridPath x = sample_fbm(model, rng);
  const PhiSpec sine = phi_sine(1.0, 0.0);
  const CondVarResult a = conditional_variance_mc(x, sine, HurstParam(0.3), 7, 2000, 7, 100, 9, 1);
  const CondVarResult b = conditional_variance_mc(x, sine, HurstParam(0.3), 7, 2000, 7, 100, 9, 4);
  CHECK(a.second_moment == b.second_moment);
  CHECK(a.mean == b.mean);
  CHECK(a.skewness == b.skewness);
}
