#pragma once

// The "plane-wave packet": a flat envelope of nominal length L carrying
// exp(i k0 x), with raised-cosine amplitude ramps of width w at both ends.
//
// Each ramp straddles its nominal edge so that exactly 3w/8 of it lies
// inside [x0 - L, x0]. With that placement the ramp mass equals the mass
// that a sharp edge at the nominal position would carry, so the packet is
// normalized by |A| = 1/sqrt(L) exactly and the nominal edges are the
// probability-equivalent sharp edges used by the regional model.

#include <algorithm>
#include <cmath>

#include "pilotwave/constants.hpp"

namespace pilotwave {

struct PlaneWavePacket {
  double k0 = 0.0;
  double length = 0.0;
  double edge_width = 0.0;
  double leading_edge = 0.0;

  static constexpr double kMinLengthInWavelengths = 50.0;
  static constexpr double kMaxEdgeFraction = 1.0 / 20.0;

  static PlaneWavePacket make(double k0, double length, double edge_width,
                              double leading_edge = 0.0) {
    PlaneWavePacket p{k0, length, edge_width, leading_edge};
    p.validate();
    return p;
  }

  /// Packet with length and edge width given in units of the central wavelength.
  static PlaneWavePacket in_wavelengths(double k0, double length_wl, double edge_wl,
                                        double leading_edge = 0.0) {
    const double lam = pilotwave::wavelength(k0);
    return make(k0, length_wl * lam, edge_wl * lam, leading_edge);
  }

  void validate() const {
    if (!(k0 > 0.0)) throw ConfigurationError("packet: k0 must be positive");
    const double lam = wavelength();
    // small relative slack so that lengths given in wavelengths pass exactly
    constexpr double slack = 1e-9;
    if (length < kMinLengthInWavelengths * lam * (1.0 - slack))
      throw ConfigurationError("packet: length must be at least 50 wavelengths");
    if (edge_width < lam * (1.0 - slack))
      throw ConfigurationError("packet: edge width must be at least one wavelength");
    if (edge_width > kMaxEdgeFraction * length * (1.0 + slack))
      throw ConfigurationError("packet: edge width must not exceed L/20");
  }

  double wavelength() const { return pilotwave::wavelength(k0); }
  double amplitude() const { return 1.0 / std::sqrt(length); }
  double trailing_edge() const { return leading_edge - length; }
  /// Half-open interval outside of which the envelope vanishes.
  double support_begin() const { return trailing_edge() - 0.625 * edge_width; }
  double support_end() const { return leading_edge + 0.625 * edge_width; }

  PlaneWavePacket translated(double dx) const {
    PlaneWavePacket p = *this;
    p.leading_edge += dx;
    return p;
  }

  /// Unit-height envelope shape as a function of xi = x - leading_edge.
  double shape(double xi) const {
    const double w = edge_width;
    const double lead_u = 0.625 * w - xi;   // distance from the leading zero point
    const double trail_u = xi + length + 0.625 * w;
    if (lead_u <= 0.0 || trail_u <= 0.0) return 0.0;
    if (lead_u < w) return ramp(lead_u / w);
    if (trail_u < w) return ramp(trail_u / w);
    return 1.0;
  }

  /// d shape / d xi.
  double shape_derivative(double xi) const {
    const double w = edge_width;
    const double lead_u = 0.625 * w - xi;
    const double trail_u = xi + length + 0.625 * w;
    if (lead_u <= 0.0 || trail_u <= 0.0) return 0.0;
    if (lead_u < w) return -ramp_slope(lead_u / w) / w;
    if (trail_u < w) return ramp_slope(trail_u / w) / w;
    return 0.0;
  }

  /// Envelope magnitude at x (the flat value is 1/sqrt(L)).
  double envelope(double x) const { return amplitude() * shape(x - leading_edge); }

  /// Probability that a particle distributed as |envelope|^2 lies left of x.
  double cdf(double x) const {
    const double w = edge_width;
    const double u = x - support_begin();
    if (u <= 0.0) return 0.0;
    const double total_span = length + 1.25 * w;
    if (u >= total_span) return 1.0;
    double mass;
    if (u < w) {
      mass = ramp_mass(u);
    } else if (u <= total_span - w) {
      mass = 0.375 * w + (u - w);
    } else {
      mass = length - ramp_mass(total_span - u);
    }
    return std::clamp(mass / length, 0.0, 1.0);
  }

  /// RMS wavenumber spread of the envelope, sqrt(int |phi'|^2 / int |phi|^2).
  double momentum_spread() const { return pi / (2.0 * std::sqrt(edge_width * length)); }

 private:
  // raised cosine rising from 0 (s = 0) to 1 (s = 1)
  static double ramp(double s) { return 0.5 * (1.0 - std::cos(pi * s)); }
  static double ramp_slope(double s) { return 0.5 * pi * std::sin(pi * s); }
  // integral of ramp(u/w)^2 du from 0 to u
  double ramp_mass(double u) const {
    const double w = edge_width;
    const double a = pi * u / w;
    return (1.5 * u - 2.0 * w / pi * std::sin(a) + w / (4.0 * pi) * std::sin(2.0 * a)) / 4.0;
  }
};

}  // namespace pilotwave
