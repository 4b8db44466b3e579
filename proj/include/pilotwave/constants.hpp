#pragma once

#include <numbers>
#include <stdexcept>
#include <string>

namespace pilotwave {

/// Thrown when a physical regime is outside what the closed-form solutions cover
/// (e.g. E <= V0 on a step).
class UnsupportedRegime : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown for inconsistent numerical or experiment configuration.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PhysicalConstants {
  double hbar = 1.0;
  double mass = 1.0;

  void validate() const {
    if (!(hbar > 0.0)) throw ConfigurationError("hbar must be positive");
    if (!(mass > 0.0)) throw ConfigurationError("mass must be positive");
  }
};

inline constexpr double pi = std::numbers::pi;

/// Envelope speed of a packet with central wavenumber k.
inline double group_velocity(double k, const PhysicalConstants& c = {}) {
  if (!(k > 0.0)) throw std::invalid_argument("group_velocity: k must be positive");
  return c.hbar * k / c.mass;
}

inline double wavelength(double k) { return 2.0 * pi / k; }

}  // namespace pilotwave
