#pragma once

// Pointwise comparison of the regional model against the oracle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "pilotwave/oracle.hpp"
#include "pilotwave/regional_wavefield.hpp"

namespace pilotwave {

struct DensityDiscrepancy {
  double relative_rms = 0.0;
  std::size_t nodes = 0;
};

/// True when x is at least `exclusion` away from every nominal edge and from the
/// potential's discontinuities, so that the regional envelopes are all flat there.
inline bool in_flat_interior(const RegionalWavefield& model, double x, double t, double exclusion) {
  const PacketEdges e = model.edge_positions(t);
  const double marks[] = {e.incident.leading,    e.incident.trailing,    e.reflected.leading,
                          e.reflected.trailing,  e.transmitted.leading,  e.transmitted.trailing,
                          0.0,                   model.barrier_width()};
  for (double m : marks)
    if (std::abs(x - m) < exclusion) return false;
  return model.classify(x, t) != RegionLabel::Vacuum;
}

/// Half-width of the zone around each edge excluded from comparisons at time t:
/// the larger of two edge widths and three Fresnel lengths sqrt(2 pi hbar tau/m),
/// tau being the time since the packet touched the potential's neighbourhood.
/// Diffraction ripples of a finite flat-top packet spread over that distance,
/// and the regional model leaves them out by construction.
inline double edge_exclusion(const RegionalWavefield& model, double t) {
  const auto& c = model.constants();
  const double tau = std::max(t - model.contact_time(), 0.0);
  return std::max(2.0 * model.packet().edge_width,
                  3.0 * std::sqrt(2.0 * pi * c.hbar * tau / c.mass));
}

/// sqrt(sum (rho_oracle - rho_regional)^2 / sum rho_regional^2) over flat-interior
/// nodes at the field's time. A negative exclusion selects edge_exclusion().
inline DensityDiscrepancy density_discrepancy(const RegionalWavefield& model, const ComplexField& f,
                                              double exclusion = -1.0) {
  if (exclusion < 0.0) exclusion = edge_exclusion(model, f.time);
  double num = 0.0;
  double den = 0.0;
  DensityDiscrepancy d;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double x = f.grid.x(i);
    if (!in_flat_interior(model, x, f.time, exclusion)) continue;
    const double r = model.density(x, f.time);
    const double o = std::norm(f.values[i]);
    num += (o - r) * (o - r);
    den += r * r;
    ++d.nodes;
  }
  if (d.nodes == 0 || !(den > 0.0))
    throw std::invalid_argument("density_discrepancy: no flat-interior nodes at this time");
  d.relative_rms = std::sqrt(num / den);
  return d;
}

}  // namespace pilotwave
