#pragma once

#include <stdexcept>
#include <string>

namespace roughtail {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid user-supplied parameter or configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Numerical breakdown (factorization failure, degenerate constants, ...).
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what) {}
};

/// Hurst exponent. Valid on (0,1); the estimators of this library additionally
/// require the rough regime (1/4, 1/2) and say so via require_main_regime().
struct HurstParam {
  double h;

  explicit HurstParam(double value) : h(value) {
    if (!(h > 0.0 && h < 1.0)) {
      throw ConfigError("Hurst parameter must lie in (0,1), got " + std::to_string(value));
    }
  }

  bool in_main_regime() const { return h > 0.25 && h < 0.5; }

  void require_main_regime(const char* where) const {
    if (!in_main_regime()) {
      throw ConfigError(std::string(where) + " requires Hurst parameter in (1/4,1/2), got " +
                        std::to_string(h));
    }
  }

  void require_below_half(const char* where) const {
    if (!(h < 0.5)) {
      throw ConfigError(std::string(where) + " requires Hurst parameter < 1/2, got " +
                        std::to_string(h));
    }
  }
};

inline constexpr const char* kVersion = "0.1.0";

}  // namespace roughtail
