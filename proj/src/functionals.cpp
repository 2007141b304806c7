#include "roughtail/functionals.hpp"

#include <algorithm>
#include <cmath>

#include "roughtail/stats.hpp"

namespace roughtail {

void QuadratureConfig::validate() const {
  if (refinement_levels.empty()) throw ConfigError("QuadratureConfig needs refinement levels");
  for (std::size_t i = 0; i + 1 < refinement_levels.size(); ++i) {
    if (refinement_levels[i] >= refinement_levels[i + 1]) {
      throw ConfigError("QuadratureConfig refinement levels must be strictly increasing");
    }
  }
  if (refinement_levels.front() < 1 || refinement_levels.back() > 22) {
    throw ConfigError("QuadratureConfig refinement levels out of range [1,22]");
  }
}

double holder_norm(const GridPath& x, double gamma, HolderMode mode) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("holder_norm requires gamma in (0,1]");
  const std::size_t n = x.values.size();
  if (n < 2) throw ConfigError("holder_norm requires a path with at least 2 nodes");
  const double h = x.step();
  const double* v = x.values.data();
  double best = 0.0;
  if (mode == HolderMode::kExact) {
    for (std::size_t d = 1; d < n; ++d) {
      double m = 0.0;
      for (std::size_t i = 0; i + d < n; ++i) {
        m = std::max(m, std::abs(v[i + d] - v[i]));
      }
      best = std::max(best, m * std::pow(static_cast<double>(d) * h, -gamma));
    }
  } else {
    for (std::size_t d = 1; d < n; d *= 2) {
      double m = 0.0;
      for (std::size_t i = 0; i + d < n; ++i) {
        m = std::max(m, std::abs(v[i + d] - v[i]));
      }
      best = std::max(best, m * std::pow(static_cast<double>(d) * h, -gamma));
    }
  }
  return best;
}

namespace detail {

std::vector<double> resample_values(const GridPath& x, int level_q) {
  if (x.level == level_q) return x.values;
  if (x.level > level_q) return subsample(x, level_q).values;
  return upsample(x, level_q).values;
}

double simplex_energy_at(std::span<const double> values, double hurst) {
  const std::size_t n = (values.size() - 1) / 2;  // number of cells
  if (n < 2 || values.size() != 2 * n + 1) {
    throw ConfigError("simplex_energy_at needs values at level cells+1 (>= 2 cells)");
  }
  const double two_h = 2.0 * hurst;
  const double h = 1.0 / static_cast<double>(n);

  // F(d*h) tabulated once; w_d = F((d+1)h) - 2F(dh) + F((d-1)h) >= 0.
  std::vector<double> fk(n + 1);
  const double denom = two_h * (two_h - 1.0);
  for (std::size_t d = 0; d <= n; ++d) {
    fk[d] = std::pow(static_cast<double>(d) * h, two_h) / denom;
  }

  std::vector<double> per_gap(n - 1);
  for (std::size_t d = 1; d < n; ++d) {
    const double w = fk[d + 1] - 2.0 * fk[d] + fk[d - 1];
    double acc = 0.0;
    const double* c = values.data() + 1;  // centres at odd indices: c[2i]
    for (std::size_t i = d; i < n; ++i) {
      const double diff = c[2 * i] - c[2 * (i - d)];
      acc += diff * diff;
    }
    per_gap[d - 1] = w * acc;
  }

  // Diagonal triangles: slope model against the exact primitive of (t-s)^{2H}.
  const double tri = std::pow(h, two_h + 2.0) / ((two_h + 1.0) * (two_h + 2.0));
  double slopes_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (values[2 * i + 2] - values[2 * i]) / h;
    slopes_sq += s * s;
  }
  per_gap.push_back(tri * slopes_sq);
  return compensated_sum(per_gap);
}

double boundary_integral_at(std::span<const double> values, double hurst) {
  const std::size_t n = (values.size() - 1) / 2;
  if (values.size() != 2 * n + 1 || n < 1) {
    throw ConfigError("boundary_integral_at needs centre-sampled values");
  }
  const double two_h = 2.0 * hurst;
  const double h = 1.0 / static_cast<double>(n);
  std::vector<double> edge_pow(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    edge_pow[k] = std::pow(static_cast<double>(k) * h, two_h);
  }
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double centre = values[2 * i + 1];
    const double mass_left = (edge_pow[i + 1] - edge_pow[i]) / two_h;        // int t^{2H-1}
    const double mass_right = (edge_pow[n - i] - edge_pow[n - i - 1]) / two_h;  // int (1-t)^{2H-1}
    terms[i] = centre * centre * (mass_left + mass_right);
  }
  return compensated_sum(terms) / (1.0 - two_h);
}

namespace {

QuadValue refine(const QuadratureConfig& q,
                 const std::function<double(int)>& eval_at_cells_level) {
  q.validate();
  QuadValue out;
  double prev = 0.0;
  for (std::size_t i = 0; i < q.refinement_levels.size(); ++i) {
    const double v = eval_at_cells_level(q.refinement_levels[i]);
    if (i + 1 == q.refinement_levels.size()) {
      out.value = v;
      out.quad_error = q.refinement_levels.size() > 1 ? std::abs(v - prev) : 0.0;
    }
    prev = v;
  }
  return out;
}

std::vector<double> compose(const std::vector<double>& xs, const PhiSpec& phi) {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = phi.value(xs[i]);
  return out;
}

}  // namespace

}  // namespace detail

QuadValue frac_sobolev_sq(const GridPath& f, HurstParam hurst, const QuadratureConfig& q) {
  hurst.require_main_regime("frac_sobolev_sq");
  const double pref = hurst.h * (1.0 - 2.0 * hurst.h);
  return detail::refine(q, [&](int cells_level) {
    const std::vector<double> vals = detail::resample_values(f, cells_level + 1);
    return pref * (detail::simplex_energy_at(vals, hurst.h) +
                   detail::boundary_integral_at(vals, hurst.h));
  });
}

QuadValue gagliardo_energy(const GridPath& x, const PhiSpec& phi, HurstParam hurst,
                           const QuadratureConfig& q) {
  hurst.require_below_half("gagliardo_energy");
  for (double v : x.values) {
    if (!std::isfinite(v)) throw NumericalError("gagliardo_energy: non-finite path value");
  }
  return detail::refine(q, [&](int cells_level) {
    const std::vector<double> xs = detail::resample_values(x, cells_level + 1);
    return detail::simplex_energy_at(detail::compose(xs, phi), hurst.h);
  });
}

double boundary_energy(const GridPath& x, const PhiSpec& phi, HurstParam hurst) {
  hurst.require_below_half("boundary_energy");
  const int cells_level = std::max(1, x.level - 1);
  const std::vector<double> xs = detail::resample_values(x, cells_level + 1);
  return detail::boundary_integral_at(detail::compose(xs, phi), hurst.h);
}

QuadValue conditional_variance(const GridPath& x, const PhiSpec& phi, HurstParam hurst,
                               const QuadratureConfig& q) {
  hurst.require_main_regime("conditional_variance");
  const double pref = hurst.h * (1.0 - 2.0 * hurst.h);
  return detail::refine(q, [&](int cells_level) {
    const std::vector<double> xs = detail::resample_values(x, cells_level + 1);
    const std::vector<double> vals = detail::compose(xs, phi);
    return pref * (detail::simplex_energy_at(vals, hurst.h) +
                   detail::boundary_integral_at(vals, hurst.h));
  });
}

}  // namespace roughtail
