#include "roughtail/fbm.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

namespace roughtail {

namespace {

inline std::size_t packed_index(std::size_t i, std::size_t j) {
  // requires j <= i
  return i * (i + 1) / 2 + j;
}

/// In-place packed lower Cholesky. Returns the failing pivot index or -1.
int packed_cholesky(std::vector<double>& a, int n) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = a[packed_index(i, j)];
      for (int k = 0; k < j; ++k) {
        sum -= a[packed_index(i, k)] * a[packed_index(j, k)];
      }
      if (i == j) {
        if (!(sum > 0.0)) return i;
        a[packed_index(i, i)] = std::sqrt(sum);
      } else {
        a[packed_index(i, j)] = sum / a[packed_index(j, j)];
      }
    }
  }
  return -1;
}

/// Solve L y = b in place.
void forward_solve(const std::vector<double>& lower, int n, std::vector<double>& b) {
  for (int i = 0; i < n; ++i) {
    double sum = b[i];
    const double* row = &lower[packed_index(i, 0)];
    for (int k = 0; k < i; ++k) sum -= row[k] * b[k];
    b[i] = sum / row[i];
  }
}

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

double fbm_covariance(double s, double t, HurstParam hurst) {
  if (s < 0.0 || t < 0.0 || s > 1.0 || t > 1.0) {
    throw ConfigError("fbm_covariance requires times in [0,1]");
  }
  const double two_h = 2.0 * hurst.h;
  return 0.5 * (std::pow(s, two_h) + std::pow(t, two_h) - std::pow(std::abs(t - s), two_h));
}

double GaussianGridModel::covariance_at(int i, int j) const {
  if (j > i) std::swap(i, j);
  return covariance_lower[packed_index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))];
}

GaussianGridModel build_model(int level, HurstParam hurst) {
  if (level < 0) throw ConfigError("build_model requires level >= 0");
  if (level > 13) {
    throw ConfigError("build_model: level " + std::to_string(level) +
                      " exceeds the dense-matrix budget (max 13)");
  }
  GaussianGridModel model;
  model.level = level;
  model.hurst = hurst;
  const int n = 1 << level;
  model.grid_times.resize(n);
  const double h = 1.0 / static_cast<double>(n);
  for (int k = 0; k < n; ++k) model.grid_times[k] = static_cast<double>(k + 1) * h;

  model.covariance_lower.resize(static_cast<std::size_t>(n) * (n + 1) / 2);
  double max_diag = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v = fbm_covariance(model.grid_times[i], model.grid_times[j], hurst);
      model.covariance_lower[packed_index(i, j)] = v;
      if (i == j) max_diag = std::max(max_diag, v);
    }
  }

  model.factor_lower = model.covariance_lower;
  int pivot = packed_cholesky(model.factor_lower, n);
  if (pivot >= 0) {
    model.jitter = 1e-12 * max_diag;
    model.jitter_applied = true;
    model.factor_lower = model.covariance_lower;
    for (int i = 0; i < n; ++i) model.factor_lower[packed_index(i, i)] += model.jitter;
    pivot = packed_cholesky(model.factor_lower, n);
    if (pivot >= 0) {
      throw CholeskyError(pivot, "fBM covariance not positive definite at pivot " +
                                     std::to_string(pivot) + " (level " + std::to_string(level) +
                                     ", H = " + std::to_string(hurst.h) + "), even with jitter");
    }
  }
  return model;
}

GridPath sample_fbm(const GaussianGridModel& model, RngStream& rng) {
  const int n = model.n();
  std::vector<double> z(n);
  for (int i = 0; i < n; ++i) z[i] = rng.normal();
  std::vector<double> v(static_cast<std::size_t>(n) + 1);
  v[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* row = &model.factor_lower[packed_index(i, 0)];
    double sum = 0.0;
    for (int k = 0; k <= i; ++k) sum += row[k] * z[k];
    v[static_cast<std::size_t>(i) + 1] = sum;
  }
  return GridPath{model.level, std::move(v), true};
}

namespace {

std::vector<double> strip_origin(const GaussianGridModel& model, const GridPath& p,
                                 const char* where) {
  if (p.level != model.level) {
    throw ConfigError(std::string(where) + ": path level " + std::to_string(p.level) +
                      " does not match model level " + std::to_string(model.level));
  }
  return {p.values.begin() + 1, p.values.end()};
}

}  // namespace

double shift_log_density_ratio(const GaussianGridModel& model, const GridPath& x,
                               const GridPath& shift) {
  std::vector<double> a = strip_origin(model, x, "shift_log_density_ratio");
  std::vector<double> b = strip_origin(model, shift, "shift_log_density_ratio");
  const int n = model.n();
  forward_solve(model.factor_lower, n, a);
  forward_solve(model.factor_lower, n, b);
  double dot_bx = 0.0, dot_bb = 0.0;
  for (int i = 0; i < n; ++i) {
    dot_bx += b[i] * a[i];
    dot_bb += b[i] * b[i];
  }
  return -dot_bx + 0.5 * dot_bb;
}

double cm_quadratic_form(const GaussianGridModel& model, const GridPath& shift) {
  std::vector<double> b = strip_origin(model, shift, "cm_quadratic_form");
  forward_solve(model.factor_lower, model.n(), b);
  double dot = 0.0;
  for (double v : b) dot += v * v;
  return dot;
}

// ---------------------------------------------------------------------------
// Circulant embedding (Davies-Harte) of fractional Gaussian noise.
// ---------------------------------------------------------------------------

CirculantFbmSampler::CirculantFbmSampler(int level, HurstParam hurst)
    : level_(level), hurst_(hurst) {
  if (level < 1 || level > 22) throw ConfigError("CirculantFbmSampler: level out of range [1,22]");
  n_ = std::size_t{1} << level;
  m_ = 2 * n_;
  const double two_h = 2.0 * hurst.h;
  const double h_pow = std::pow(1.0 / static_cast<double>(n_), two_h);

  // Autocovariance of unit-lag fGn, scaled to the grid step.
  auto gamma = [&](std::size_t k) {
    const double kk = static_cast<double>(k);
    return 0.5 * h_pow *
           (std::pow(kk + 1.0, two_h) - 2.0 * std::pow(kk, two_h) +
            std::pow(std::abs(kk - 1.0), two_h));
  };

  std::lock_guard<std::mutex> lock(fftw_mutex());
  plan_buf_ = fftw_malloc(sizeof(fftw_complex) * m_);
  auto* buf = static_cast<fftw_complex*>(plan_buf_);
  plan_ = fftw_plan_dft_1d(static_cast<int>(m_), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);

  for (std::size_t j = 0; j <= n_; ++j) {
    buf[j][0] = gamma(j);
    buf[j][1] = 0.0;
  }
  for (std::size_t j = n_ + 1; j < m_; ++j) {
    buf[j][0] = gamma(m_ - j);
    buf[j][1] = 0.0;
  }
  fftw_execute(static_cast<fftw_plan>(plan_));

  std::vector<double> eig(m_);
  double max_eig = 0.0;
  min_eig_ = 0.0;
  for (std::size_t k = 0; k < m_; ++k) {
    eig[k] = buf[k][0];
    max_eig = std::max(max_eig, eig[k]);
    min_eig_ = std::min(min_eig_, eig[k]);
  }
  if (min_eig_ < -1e-10 * max_eig) {
    throw NumericalError("circulant embedding not nonnegative definite (min eigenvalue " +
                         std::to_string(min_eig_) + ")");
  }
  const double inv_m = 1.0 / static_cast<double>(m_);
  scale_0_ = std::sqrt(std::max(0.0, eig[0]) * inv_m);
  scale_half_ = std::sqrt(std::max(0.0, eig[n_]) * inv_m);
  scale_mid_.resize(n_ - 1);
  for (std::size_t k = 1; k < n_; ++k) {
    scale_mid_[k - 1] = std::sqrt(std::max(0.0, eig[k]) * 0.5 * inv_m);
  }
}

CirculantFbmSampler::~CirculantFbmSampler() {
  std::lock_guard<std::mutex> lock(fftw_mutex());
  if (plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  if (plan_buf_ != nullptr) fftw_free(plan_buf_);
}

CirculantFbmSampler::Workspace::Workspace(const CirculantFbmSampler& sampler) : m_(sampler.m_) {
  std::lock_guard<std::mutex> lock(fftw_mutex());
  in_ = fftw_malloc(sizeof(fftw_complex) * m_);
  out_ = fftw_malloc(sizeof(fftw_complex) * m_);
}

CirculantFbmSampler::Workspace::~Workspace() {
  std::lock_guard<std::mutex> lock(fftw_mutex());
  if (in_ != nullptr) fftw_free(in_);
  if (out_ != nullptr) fftw_free(out_);
}

GridPath CirculantFbmSampler::sample(RngStream& rng, Workspace& ws) const {
  if (ws.m_ != m_) throw ConfigError("circulant workspace size mismatch");
  auto* in = static_cast<fftw_complex*>(ws.in_);
  auto* out = static_cast<fftw_complex*>(ws.out_);

  in[0][0] = scale_0_ * rng.normal();
  in[0][1] = 0.0;
  in[n_][0] = scale_half_ * rng.normal();
  in[n_][1] = 0.0;
  for (std::size_t k = 1; k < n_; ++k) {
    const double re = scale_mid_[k - 1] * rng.normal();
    const double im = scale_mid_[k - 1] * rng.normal();
    in[k][0] = re;
    in[k][1] = im;
    in[m_ - k][0] = re;
    in[m_ - k][1] = -im;
  }
  fftw_execute_dft(static_cast<fftw_plan>(plan_), in, out);

  std::vector<double> v(n_ + 1);
  v[0] = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    acc += out[i][0];  // imaginary parts cancel by Hermitian symmetry
    v[i + 1] = acc;
  }
  return GridPath{level_, std::move(v), true};
}

GridPath CirculantFbmSampler::sample(RngStream& rng) const {
  Workspace ws(*this);
  return sample(rng, ws);
}

}  // namespace roughtail
