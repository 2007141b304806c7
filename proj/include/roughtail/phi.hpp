#pragma once

#include <functional>
#include <optional>
#include <string>

#include "roughtail/common.hpp"

namespace roughtail {

/// Non-degeneracy data for a test function: within every window of length r
/// the derivative magnitude reaches at least eta somewhere; rho is the
/// matched scale constant 2^alpha * r / D where D is the minimal unit-window
/// oscillation of the Weierstrass path.
struct NonDegData {
  double r = 0.0;
  double eta = 0.0;
  double rho = 0.0;
};

/// A scalar test function with recorded uniform bounds on phi, phi', phi''.
/// The built-in family (sine, constant, identity) carries exact segment
/// averages; segment_average falls back to Gauss-Legendre otherwise.
struct PhiSpec {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> deriv;
  std::function<double(double)> deriv2;
  // Average of phi over the straight segment from a to b; exact for built-ins.
  std::function<double(double, double)> seg_avg;
  double sup_value = 0.0;
  double sup_deriv = 0.0;
  double sup_deriv2 = 0.0;
  std::optional<double> period;
  bool bounded = true;  // identity is admitted for closed-form oracles only
  std::optional<NonDegData> nondeg;

  double operator()(double x) const { return value(x); }

  /// Average of phi over the linear segment x(t) = a + t(b-a), t in [0,1].
  double segment_average(double a, double b) const;
};

PhiSpec phi_sine(double omega = 1.0, double phase = 0.0);
PhiSpec phi_const(double c);
/// Unbounded test-only function phi(u) = u; enables exact chain-rule oracles.
PhiSpec phi_identity();

}  // namespace roughtail
