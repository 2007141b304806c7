#include <doctest.h>

#include <cmath>
#include <vector>

#include "roughtail/fbm.hpp"
#include "roughtail/stats.hpp"
#include "roughtail/weierstrass.hpp"

using namespace roughtail;

namespace {

// Empirical covariance of n sampled paths against Sigma, entrywise z-scores.
template <typename Sampler>
int covariance_violations(const GaussianGridModel& model, Sampler&& draw, int n_samples,
                          double z_limit) {
  const int n = model.n();
  std::vector<double> acc(static_cast<std::size_t>(n) * n, 0.0);
  for (int s = 0; s < n_samples; ++s) {
    const GridPath x = draw(s);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        acc[static_cast<std::size_t>(i) * n + j] += x.values[i + 1] * x.values[j + 1];
      }
    }
  }
  int violations = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double emp = acc[static_cast<std::size_t>(i) * n + j] / n_samples;
      const double truth = model.covariance_at(i, j);
      const double se = std::sqrt(
          (model.covariance_at(i, i) * model.covariance_at(j, j) + truth * truth) / n_samples);
      if (std::abs(emp - truth) > z_limit * se) ++violations;
    }
  }
  return violations;
}

}  // namespace

TEST_CASE("fbm_covariance closed-form values") {
  CHECK(fbm_covariance(1.0, 1.0, HurstParam(0.35)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(fbm_covariance(0.3, 0.8, HurstParam(0.5)) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(fbm_covariance(0.5, 0.5, HurstParam(0.25)) ==
        doctest::Approx(0.70710678118654752).epsilon(1e-14));
  CHECK(fbm_covariance(0.0, 0.7, HurstParam(0.35)) == 0.0);
  CHECK_THROWS_AS(fbm_covariance(-0.1, 0.5, HurstParam(0.35)), ConfigError);
  CHECK_THROWS_AS(HurstParam(1.2), ConfigError);
  CHECK_THROWS_AS(HurstParam(0.0), ConfigError);
}

TEST_CASE("fbm_covariance symmetry and diagonal identity") {
  const HurstParam h(0.41);
  for (int i = 0; i < 25; ++i) {
    const double s = (i * 7 % 25) / 25.0;
    const double t = (i * 11 % 25 + 1) / 25.0;
    CHECK(fbm_covariance(s, t, h) == fbm_covariance(t, s, h));
    CHECK(fbm_covariance(t, t, h) == doctest::Approx(std::pow(t, 2 * h.h)).epsilon(1e-15));
  }
}

TEST_CASE("H = 1/2 covariance reduces to min(s,t) on a 100x100 grid") {
  const HurstParam h(0.5);
  for (int i = 1; i <= 100; ++i) {
    for (int j = 1; j <= 100; ++j) {
      const double s = i / 100.0, t = j / 100.0;
      CHECK(fbm_covariance(s, t, h) == doctest::Approx(std::min(s, t)).epsilon(1e-13));
    }
  }
}

TEST_CASE("build_model diagonal and reconstruction") {
  const GaussianGridModel m3 = build_model(3, HurstParam(0.35));
  for (int i = 0; i < m3.n(); ++i) {
    CHECK(m3.covariance_at(i, i) ==
          doctest::Approx(std::pow(m3.grid_times[i], 0.7)).epsilon(1e-14));
  }

  const GaussianGridModel m8 = build_model(8, HurstParam(0.3));
  // ||L L^T - Sigma||_max < 1e-10
  const int n = m8.n();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double dot = 0.0;
      for (int k = 0; k <= j; ++k) {
        dot += m8.factor_lower[i * (i + 1) / 2 + k] * m8.factor_lower[j * (j + 1) / 2 + k];
      }
      worst = std::max(worst, std::abs(dot - m8.covariance_at(i, j)));
    }
  }
  CHECK(worst < 1e-10);
  CHECK_FALSE(m8.jitter_applied);
}

TEST_CASE("scalar grid model (level 0) matches the 1x1 formulas") {
  const GaussianGridModel m = build_model(0, HurstParam(0.35));
  REQUIRE(m.n() == 1);
  CHECK(m.covariance_at(0, 0) == doctest::Approx(1.0));
  CHECK(m.factor_lower[0] == doctest::Approx(1.0));

  const GridPath shift{0, {0.0, 0.8}, true};
  const GridPath x{0, {0.0, -1.3}, true};
  CHECK(shift_log_density_ratio(m, x, shift) ==
        doctest::Approx(-0.8 * -1.3 + 0.5 * 0.64).epsilon(1e-14));
  CHECK(cm_quadratic_form(m, shift) == doctest::Approx(0.64).epsilon(1e-14));
}

TEST_CASE("sample_fbm starts at zero and reproduces variances") {
  const GaussianGridModel model = build_model(8, HurstParam(0.35));
  std::vector<double> x1(20000);
  for (std::size_t s = 0; s < x1.size(); ++s) {
    RngStream rng(123, s);
    const GridPath p = sample_fbm(model, rng);
    CHECK(p.values[0] == 0.0);
    x1[s] = p.values.back();
  }
  // Var(X_1) = R(1,1) = 1, stderr of the second moment ~ sqrt(2/n)
  std::vector<double> sq(x1.size());
  for (std::size_t i = 0; i < x1.size(); ++i) sq[i] = x1[i] * x1[i];
  const auto [mean, se] = mean_stderr(sq);
  CHECK(std::abs(mean - 1.0) < 4.0 * se);
}

TEST_CASE("Brownian increments over [0,1/2], [1/2,1] are uncorrelated") {
  const GaussianGridModel model = build_model(8, HurstParam(0.5));
  const std::size_t n = 20000;
  std::vector<double> prod(n);
  double va = 0.0, vb = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    RngStream rng(7, s);
    const GridPath p = sample_fbm(model, rng);
    const double a = p.values[128] - p.values[0];
    const double b = p.values[256] - p.values[128];
    prod[s] = a * b;
    va += a * a;
    vb += b * b;
  }
  const auto [mean, se] = mean_stderr(prod);
  CHECK(std::abs(mean) < 4.0 * se);
  CHECK(va / n == doctest::Approx(0.5).epsilon(0.05));
  CHECK(vb / n == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("empirical covariance of the Cholesky sampler at level 4") {
  const GaussianGridModel model = build_model(4, HurstParam(0.35));
  const int violations = covariance_violations(
      model,
      [&](int s) {
        RngStream rng(99, static_cast<std::uint64_t>(s));
        return sample_fbm(model, rng);
      },
      20000, 5.0);
  CHECK(violations == 0);
}

TEST_CASE("circulant sampler matches the covariance and pins the origin") {
  const GaussianGridModel model = build_model(5, HurstParam(0.35));
  CirculantFbmSampler sampler(5, HurstParam(0.35));
  CHECK(sampler.min_eigenvalue() >= -1e-12);
  const int violations = covariance_violations(
      model,
      [&](int s) {
        RngStream rng(2024, static_cast<std::uint64_t>(s));
        const GridPath p = sampler.sample(rng);
        CHECK(p.values[0] == 0.0);
        return p;
      },
      20000, 5.0);
  CHECK(violations == 0);

  // determinism: same (seed, stream) -> same path
  RngStream r1(5, 17), r2(5, 17);
  const GridPath a = sampler.sample(r1);
  const GridPath b = sampler.sample(r2);
  CHECK(a.values == b.values);
}

TEST_CASE("shift_log_density_ratio: zero shift and grid mismatch") {
  const GaussianGridModel model = build_model(4, HurstParam(0.35));
  RngStream rng(1, 0);
  const GridPath x = sample_fbm(model, rng);
  const GridPath zero{4, std::vector<double>(17, 0.0), true};
  CHECK(shift_log_density_ratio(model, x, zero) == 0.0);

  const GridPath wrong{3, std::vector<double>(9, 0.0), true};
  CHECK_THROWS_AS(shift_log_density_ratio(model, x, wrong), ConfigError);
  CHECK_THROWS_AS(cm_quadratic_form(model, wrong), ConfigError);
}

TEST_CASE("importance weights are unbiased under shifted sampling") {
  // Shift scaled so the weight distribution is simulable: the raw Weierstrass
  // path has a huge discrete Cameron-Martin energy (~1.8e3 at level 6).
  const HurstParam h(0.35);
  const GaussianGridModel model = build_model(6, h);
  const WeierstrassParams wp = WeierstrassParams::certified(0.9, 1e-10, 2.0);
  const GridPath shift = scale(discretize_weierstrass(wp, 6), 0.0468);
  const double q = cm_quadratic_form(model, shift);
  CHECK(q == doctest::Approx(4.0).epsilon(0.05));

  const std::size_t n = 30000;
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng(31, i);
    const GridPath x = axpby(1.0, sample_fbm(model, rng), 1.0, shift);
    w[i] = std::exp(shift_log_density_ratio(model, x, shift));
  }
  const auto [mean, se] = mean_stderr(w);
  CHECK(std::abs(mean - 1.0) < 4.0 * se);
}

TEST_CASE("cm_quadratic_form is zero at zero and nondecreasing in level") {
  const HurstParam h(0.35);
  const WeierstrassParams wp = WeierstrassParams::certified(0.9, 1e-10, 2.0);
  double prev = 0.0;
  for (int level = 4; level <= 7; ++level) {
    const GaussianGridModel model = build_model(level, h);
    const GridPath zero{level, std::vector<double>(grid_size(level), 0.0), true};
    CHECK(cm_quadratic_form(model, zero) == 0.0);
    const double q = cm_quadratic_form(model, discretize_weierstrass(wp, level));
    CHECK(q >= prev);
    prev = q;
  }
  // frozen reference from an independent dense-solver computation
  const GaussianGridModel m6 = build_model(6, h);
  CHECK(cm_quadratic_form(m6, discretize_weierstrass(wp, 6)) ==
        doctest::Approx(1827.34).epsilon(1e-3));
}
