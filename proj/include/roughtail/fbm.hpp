#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "roughtail/common.hpp"
#include "roughtail/grid_path.hpp"
#include "roughtail/rng.hpp"

namespace roughtail {

class CholeskyError : public NumericalError {
 public:
  CholeskyError(int pivot, const std::string& what) : NumericalError(what), pivot_index(pivot) {}
  int pivot_index;
};

/// Covariance of fractional Brownian motion on [0,1]:
///   R(s,t) = (s^2H + t^2H - |t-s|^2H) / 2.
/// Reduces to min(s,t) at H = 1/2 and vanishes when either time is 0.
double fbm_covariance(double s, double t, HurstParam hurst);

/// Finite-dimensional Gaussian model of fBM on the dyadic grid of a given
/// level. The origin carries no randomness and is excluded; the matrix is
/// stored over times {k 2^-level : k = 1..2^level}. Immutable after
/// construction and safe to share across threads.
struct GaussianGridModel {
  int level = 0;
  HurstParam hurst{0.5};
  std::vector<double> grid_times;        // n = 2^level entries, t > 0
  std::vector<double> covariance_lower;  // packed lower triangle of Sigma, row-major
  std::vector<double> factor_lower;      // packed lower-triangular Cholesky factor
  bool jitter_applied = false;
  double jitter = 0.0;

  int n() const { return static_cast<int>(grid_times.size()); }
  double covariance_at(int i, int j) const;  // full-matrix indexing
};

/// Assemble Sigma from fbm_covariance and factor it. On a failed pivot, one
/// retry with jitter <= 1e-12 * max(diag) is attempted and recorded; a second
/// failure throws CholeskyError with the failing pivot index.
GaussianGridModel build_model(int level, HurstParam hurst);

/// Exact sampler: origin-pinned path with law N(0, Sigma) on the grid.
GridPath sample_fbm(const GaussianGridModel& model, RngStream& rng);

/// log [ dN(0,Sigma) / dN(shift,Sigma) ](x)
///   = -<shift, Sigma^-1 x> + <shift, Sigma^-1 shift>/2,
/// computed with triangular solves against the stored factor. exp of this is
/// the importance weight that makes mean-shifted sampling unbiased.
double shift_log_density_ratio(const GaussianGridModel& model, const GridPath& x,
                               const GridPath& shift);

/// <shift, Sigma^-1 shift>; the discrete Cameron-Martin energy proxy.
/// Nondecreasing under grid refinement of the same continuous path.
double cm_quadratic_form(const GaussianGridModel& model, const GridPath& shift);

/// Davies-Harte circulant-embedding sampler of stationary fBM increments.
/// Exact in law (the fGn embedding is nonnegative definite for H <= 1/2) and
/// O(n log n) per path, which makes fine-grid Monte Carlo affordable.
///
/// Per-draw FFT work goes through a Workspace; sampling is thread-safe when
/// each thread owns its workspace.
class CirculantFbmSampler {
 public:
  CirculantFbmSampler(int level, HurstParam hurst);
  ~CirculantFbmSampler();
  CirculantFbmSampler(const CirculantFbmSampler&) = delete;
  CirculantFbmSampler& operator=(const CirculantFbmSampler&) = delete;

  class Workspace {
   public:
    explicit Workspace(const CirculantFbmSampler& sampler);
    ~Workspace();
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;

   private:
    friend class CirculantFbmSampler;
    void* in_ = nullptr;   // fftw_complex[m]
    void* out_ = nullptr;  // fftw_complex[m]
    std::size_t m_ = 0;
  };

  GridPath sample(RngStream& rng, Workspace& ws) const;
  GridPath sample(RngStream& rng) const;  // convenience, allocates a workspace

  int level() const { return level_; }
  HurstParam hurst() const { return hurst_; }
  double min_eigenvalue() const { return min_eig_; }

 private:
  int level_;
  HurstParam hurst_;
  std::size_t n_;  // increments per path
  std::size_t m_;  // circulant size, 2n
  std::vector<double> scale_mid_;   // sqrt(lambda_k / (2m)), k = 1..m/2-1
  double scale_0_ = 0.0;            // sqrt(lambda_0 / m)
  double scale_half_ = 0.0;         // sqrt(lambda_{m/2} / m)
  double min_eig_ = 0.0;
  void* plan_ = nullptr;            // fftw_plan, forward complex DFT of size m
  void* plan_buf_ = nullptr;        // fftw_complex[m] used at planning time
};

}  // namespace roughtail
