#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace roughtail {

/// Seeded, stream-splittable generator. (seed, stream) fully determines the
/// output sequence, so Monte Carlo loops that assign one stream per sample
/// are reproducible independent of worker count and scheduling.
///
/// Normals come from a cached Box-Muller transform on 53-bit uniforms; no
/// rejection step, so the draw count per call is fixed.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x9e3779b9u};
    eng_.seed(seq);
  }

  /// Uniform on (0,1].
  double uniform01() {
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1p-53;
  }

  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace roughtail
