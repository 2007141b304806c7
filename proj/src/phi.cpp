#include "roughtail/phi.hpp"

#include <array>
#include <cmath>

namespace roughtail {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// 8-point Gauss-Legendre on [0,1].
constexpr std::array<double, 8> kGaussNodes = {
    0.01985507175123188415821957, 0.10166676129318663020422303, 0.2372337950418355070911305,
    0.40828267875217509753026193, 0.59171732124782490246973807, 0.7627662049581644929088695,
    0.89833323870681336979577697, 0.98014492824876811584178043};
constexpr std::array<double, 8> kGaussWeights = {
    0.05061426814518812957626567, 0.11119051722668723527217800, 0.15685332293894364366898110,
    0.18134189168918099148257522, 0.18134189168918099148257522, 0.15685332293894364366898110,
    0.11119051722668723527217800, 0.05061426814518812957626567};

inline double sinc(double z) { return z == 0.0 ? 1.0 : std::sin(z) / z; }

}  // namespace

double PhiSpec::segment_average(double a, double b) const {
  if (seg_avg) return seg_avg(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < kGaussNodes.size(); ++i) {
    acc += kGaussWeights[i] * value(a + (b - a) * kGaussNodes[i]);
  }
  return acc;
}

PhiSpec phi_sine(double omega, double phase) {
  if (omega == 0.0) throw ConfigError("phi_sine requires omega != 0");
  PhiSpec p;
  p.name = "sin(" + std::to_string(omega) + "*x+" + std::to_string(phase) + ")";
  p.value = [omega, phase](double x) { return std::sin(omega * x + phase); };
  p.deriv = [omega, phase](double x) { return omega * std::cos(omega * x + phase); };
  p.deriv2 = [omega, phase](double x) { return -omega * omega * std::sin(omega * x + phase); };
  // (1/(b-a)) \int_a^b sin(w u + c) du = sin(mid) * sinc(half), cancellation-free.
  p.seg_avg = [omega, phase](double a, double b) {
    const double mid = omega * 0.5 * (a + b) + phase;
    const double half = omega * 0.5 * (b - a);
    return std::sin(mid) * sinc(half);
  };
  p.sup_value = 1.0;
  p.sup_deriv = std::abs(omega);
  p.sup_deriv2 = omega * omega;
  p.period = 2.0 * kPi / std::abs(omega);
  return p;
}

PhiSpec phi_const(double c) {
  PhiSpec p;
  p.name = "const(" + std::to_string(c) + ")";
  p.value = [c](double) { return c; };
  p.deriv = [](double) { return 0.0; };
  p.deriv2 = [](double) { return 0.0; };
  p.seg_avg = [c](double, double) { return c; };
  p.sup_value = std::abs(c);
  p.sup_deriv = 0.0;
  p.sup_deriv2 = 0.0;
  p.period = 1.0;
  return p;
}

PhiSpec phi_identity() {
  PhiSpec p;
  p.name = "identity";
  p.value = [](double x) { return x; };
  p.deriv = [](double) { return 1.0; };
  p.deriv2 = [](double) { return 0.0; };
  p.seg_avg = [](double a, double b) { return 0.5 * (a + b); };
  p.sup_value = std::numeric_limits<double>::infinity();
  p.sup_deriv = 1.0;
  p.sup_deriv2 = 0.0;
  p.bounded = false;
  return p;
}

}  // namespace roughtail
