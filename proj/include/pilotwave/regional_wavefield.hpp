#pragma once

// Regional (piecewise plane-wave, moving-edge) wavefield of a plane-wave
// packet scattering off a step or tunneling through a barrier.
//
// Time zero is the instant the nominal leading edge of the incident packet
// reaches the origin; T = L/v_g is when its nominal trailing edge arrives.
// Every outgoing term carries the incident envelope value that crossed the
// origin at its emission time, so the envelopes of the reflected and
// transmitted packets are the incident envelope mirrored or rescaled.
// The overall time phase exp(-iEt/hbar) is omitted.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string_view>
#include <utility>

#include "pilotwave/analytic_scattering.hpp"
#include "pilotwave/packet.hpp"

namespace pilotwave {

enum class RegionLabel { Vacuum, IncidentOnly, Overlap, ReflectedOnly, Transmitted, ForbiddenRegion };

inline std::string_view to_string(RegionLabel r) {
  switch (r) {
    case RegionLabel::Vacuum: return "vacuum";
    case RegionLabel::IncidentOnly: return "incident";
    case RegionLabel::Overlap: return "overlap";
    case RegionLabel::ReflectedOnly: return "reflected";
    case RegionLabel::Transmitted: return "transmitted";
    case RegionLabel::ForbiddenRegion: return "forbidden";
  }
  return "unknown";
}

struct EdgePair {
  double leading = 0.0;
  double trailing = 0.0;
  double length() const { return std::abs(leading - trailing); }
};

/// Nominal (sharp) edge positions of the three packets.
struct PacketEdges {
  EdgePair incident;
  EdgePair reflected;
  EdgePair transmitted;
};

struct WaveSample {
  RegionLabel label = RegionLabel::Vacuum;
  complex psi{};
  complex dpsi{};
  double density() const { return std::norm(psi); }
  /// j / rho in units where hbar/m = 1.
  double phase_gradient() const { return std::imag(std::conj(psi) * dpsi) / std::norm(psi); }
};

class RegionalWavefield {
 public:
  /// The packet's k0 is taken from the scenario; its leading edge is placed at the origin.
  RegionalWavefield(const ScatterScenario& scenario, double length_wavelengths,
                    double edge_wavelengths)
      : scenario_(scenario), k_(wavenumbers(scenario)) {
    packet_ = PlaneWavePacket::in_wavelengths(k_.k0, length_wavelengths, edge_wavelengths, 0.0);
    init();
  }

  RegionalWavefield(const ScatterScenario& scenario, const PlaneWavePacket& packet)
      : scenario_(scenario), k_(wavenumbers(scenario)), packet_(packet) {
    if (std::abs(packet.k0 - k_.k0) > 1e-12 * k_.k0)
      throw ConfigurationError("regional wavefield: packet k0 does not match the scenario energy");
    packet_.leading_edge = 0.0;
    packet_.validate();
    init();
  }

  const ScatterScenario& scenario() const { return scenario_; }
  const PlaneWavePacket& packet() const { return packet_; }
  const Wavenumbers& k() const { return k_; }
  const PhysicalConstants& constants() const { return scenario_.constants; }
  bool is_barrier() const { return scenario_.is_barrier(); }
  double barrier_width() const { return a_; }

  double incident_speed() const { return v_in_; }
  double transmitted_speed() const { return v_out_; }
  double T() const { return packet_.length / v_in_; }
  /// Time at which the leading ramp of the incident support first touches the origin.
  double contact_time() const { return -(packet_.support_end() - packet_.leading_edge) / v_in_; }

  double amplitude() const { return A_; }
  complex reflection_ratio() const { return r_; }
  /// C/A for the step, F/A for the barrier.
  complex transmission_ratio() const { return tr_; }
  double overlap_phase() const { return std::arg(r_); }
  double P_T() const { return P_T_; }
  double P_R() const { return P_R_; }
  const StepSolution& step() const { return step_; }
  const BarrierSolution& barrier() const { return barrier_; }

  /// Incident packet at time t, valid while t <= contact_time().
  PlaneWavePacket incident_packet_at(double t) const { return packet_.translated(v_in_ * t); }

  PacketEdges edge_positions(double t) const {
    PacketEdges e;
    const double L = packet_.length;
    const double Tt = T();
    e.incident.leading = std::min(v_in_ * t, 0.0);
    e.incident.trailing = std::min(v_in_ * t - L, 0.0);
    e.reflected.leading = t > 0.0 ? -v_in_ * t : 0.0;
    e.reflected.trailing = t > Tt ? -v_in_ * (t - Tt) : 0.0;
    const double base = is_barrier() ? a_ : 0.0;
    e.transmitted.leading = t > 0.0 ? base + v_out_ * t : base;
    e.transmitted.trailing = t > Tt ? base + v_out_ * (t - Tt) : base;
    return e;
  }

  WaveSample sample(double x, double t) const {
    const complex I(0.0, 1.0);
    const double k0 = k_.k0;
    WaveSample s;
    if (x < 0.0) {
      const double inc = packet_.shape(x - v_in_ * t);
      const double ref = packet_.shape(-x - v_in_ * t);
      if (inc <= 0.0 && ref <= 0.0) return s;
      s.label = inc > 0.0 ? (ref > 0.0 ? RegionLabel::Overlap : RegionLabel::IncidentOnly)
                          : RegionLabel::ReflectedOnly;
      const double dinc = packet_.shape_derivative(x - v_in_ * t);
      const double dref = -packet_.shape_derivative(-x - v_in_ * t);
      const complex ein = std::exp(I * k0 * x);
      const complex eout = std::conj(ein);
      s.psi = A_ * (inc * ein + r_ * ref * eout);
      s.dpsi = A_ * ((dinc + I * k0 * inc) * ein + r_ * (dref - I * k0 * ref) * eout);
      return s;
    }
    if (!is_barrier()) {
      const double kap = k_.kappa0;
      const double stretch = k0 / kap;
      const double env = packet_.shape(x * stretch - v_in_ * t);
      if (env <= 0.0) return s;
      const double denv = packet_.shape_derivative(x * stretch - v_in_ * t) * stretch;
      const complex e = std::exp(I * kap * x);
      s.label = RegionLabel::Transmitted;
      s.psi = A_ * tr_ * env * e;
      s.dpsi = A_ * tr_ * (denv + I * kap * env) * e;
      return s;
    }
    if (x <= a_) {
      const double env = packet_.shape(-v_in_ * t);
      if (env <= 0.0) return s;
      const double kap = k_.kappa0;
      const complex decay = barrier_.C_scaled_over_A * std::exp(kap * (a_ - x));
      const complex grow = barrier_.D_scaled_over_A * std::exp(-kap * (a_ - x));
      s.label = RegionLabel::ForbiddenRegion;
      s.psi = A_ * env * (decay + grow);
      s.dpsi = A_ * env * kap * (grow - decay);
      return s;
    }
    const double xi = x - a_ - v_in_ * t;
    const double env = packet_.shape(xi);
    if (env <= 0.0) return s;
    const double denv = packet_.shape_derivative(xi);
    const complex e = std::exp(I * k0 * x);
    s.label = RegionLabel::Transmitted;
    s.psi = A_ * tr_ * env * e;
    s.dpsi = A_ * tr_ * (denv + I * k0 * env) * e;
    return s;
  }

  RegionLabel classify(double x, double t) const { return sample(x, t).label; }
  complex psi(double x, double t) const { return sample(x, t).psi; }
  double density(double x, double t) const { return std::norm(sample(x, t).psi); }

  /// An interval containing every point where the regional wavefield is nonzero at time t.
  std::pair<double, double> support_window(double t) const {
    const double w5 = packet_.support_end() - packet_.leading_edge;
    const double L = packet_.length;
    const double left = std::min({v_in_ * t - L - w5, -v_in_ * t - w5, 0.0});
    double right;
    if (is_barrier()) {
      right = a_ + std::max(v_in_ * t + w5, 0.0);
    } else {
      right = std::max((v_in_ * t + w5) * k_.kappa0 / k_.k0, 0.0);
    }
    const double inc_right = std::min(v_in_ * t + w5, 0.0);
    return {left, std::max(right, inc_right)};
  }

 private:
  void init() {
    const auto& c = scenario_.constants;
    A_ = packet_.amplitude();
    v_in_ = group_velocity(k_.k0, c);
    if (is_barrier()) {
      a_ = scenario_.barrier_width();
      barrier_ = barrier_solution(k_, a_);
      r_ = barrier_.B_over_A;
      tr_ = barrier_.F_over_A;
      P_T_ = barrier_.P_T;
      P_R_ = barrier_.P_R;
      v_out_ = v_in_;
    } else {
      a_ = 0.0;
      step_ = step_solution(k_);
      r_ = step_.B_over_A;
      tr_ = step_.C_over_A;
      P_T_ = step_.P_T;
      P_R_ = step_.P_R;
      v_out_ = group_velocity(k_.kappa0, c);
    }
  }

  ScatterScenario scenario_;
  Wavenumbers k_;
  PlaneWavePacket packet_;
  StepSolution step_{};
  BarrierSolution barrier_{};
  double A_ = 0.0;
  double a_ = 0.0;
  double v_in_ = 0.0;
  double v_out_ = 0.0;
  complex r_{};
  complex tr_{};
  double P_T_ = 0.0;
  double P_R_ = 0.0;
};

}  // namespace pilotwave
