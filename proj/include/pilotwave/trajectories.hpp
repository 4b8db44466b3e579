#pragma once

// Pilot-wave guidance: dX/dt = j/rho evaluated at the particle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "pilotwave/oracle.hpp"
#include "pilotwave/packet.hpp"
#include "pilotwave/parallel.hpp"
#include "pilotwave/regional_wavefield.hpp"

namespace pilotwave {

enum class Outcome { Transmitted, Reflected, Unresolved };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Transmitted: return "transmitted";
    case Outcome::Reflected: return "reflected";
    case Outcome::Unresolved: return "unresolved";
  }
  return "unknown";
}

struct VelocitySample {
  double v = 0.0;
  RegionLabel label = RegionLabel::Vacuum;
  bool resolved = false;
};

/// Mean overlap velocity (hbar k0/m)(A^2 - B^2)/(A^2 + B^2).
inline double drift_velocity_overlap(double A_mag, double B_mag, double k0,
                                     const PhysicalConstants& c = {}) {
  if (!(A_mag > B_mag) || B_mag < 0.0)
    throw std::invalid_argument("drift_velocity_overlap: requires |A| > |B| >= 0");
  const double a2 = A_mag * A_mag;
  const double b2 = B_mag * B_mag;
  return group_velocity(k0, c) * (a2 - b2) / (a2 + b2);
}

/// Velocity field of the regional model. Constant group velocities in the
/// single-packet windows, the interference velocity j/rho in the overlap
/// and the stationary tunneling velocity inside the barrier.
class RegionalVelocityField {
 public:
  static constexpr double kDensityFloorFactor = 1e-12;

  explicit RegionalVelocityField(const RegionalWavefield& field)
      : field_(&field), floor_(kDensityFloorFactor / field.packet().length) {}

  const RegionalWavefield& field() const { return *field_; }
  double classification_time() const { return field_->T(); }
  double density_floor() const { return floor_; }

  VelocitySample operator()(double x, double t) const {
    const WaveSample w = field_->sample(x, t);
    VelocitySample s;
    s.label = w.label;
    if (w.label == RegionLabel::Vacuum || !(w.density() > floor_)) return s;
    s.resolved = true;
    const auto& c = field_->constants();
    switch (w.label) {
      case RegionLabel::IncidentOnly: s.v = field_->incident_speed(); break;
      case RegionLabel::ReflectedOnly: s.v = -field_->incident_speed(); break;
      case RegionLabel::Transmitted: s.v = field_->transmitted_speed(); break;
      case RegionLabel::ForbiddenRegion: s.v = cfr_velocity(x); break;
      case RegionLabel::Overlap: s.v = c.hbar / c.mass * w.phase_gradient(); break;
      case RegionLabel::Vacuum: break;
    }
    return s;
  }

  /// Outgoing-window classification, available once the incident packet has gone (t > T).
  std::optional<Outcome> outcome(double x, double t) const {
    if (!(t > field_->T())) return std::nullopt;
    const RegionLabel r = field_->classify(x, t);
    if (r == RegionLabel::Transmitted) return Outcome::Transmitted;
    if (r == RegionLabel::ReflectedOnly) return Outcome::Reflected;
    return std::nullopt;
  }

 private:
  double cfr_velocity(double x) const {
    const auto& k = field_->k();
    const auto& c = field_->constants();
    const double a = field_->barrier_width();
    const double theta = field_->barrier().theta;
    return c.hbar * k.kappa0 / c.mass * std::sin(theta) /
           (std::cos(theta) + std::cosh(2.0 * k.kappa0 * (a - x)));
  }

  const RegionalWavefield* field_;
  double floor_;
};

/// Regional velocity at (x, t); throws where the particle cannot be (psi = 0 or below the density floor).
inline double velocity_regional(const RegionalWavefield& field, double x, double t) {
  const VelocitySample s = RegionalVelocityField(field)(x, t);
  if (!s.resolved) throw std::domain_error("velocity_regional: no wave at this point");
  return s.v;
}

/// Uniform double in [0, 1) from the top 53 bits; stable across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// I.i.d. positions from |psi(x, 0)|^2 of the packet by inverse-CDF sampling.
inline std::vector<double> sample_initial_positions(const PlaneWavePacket& packet, std::size_t n,
                                                    std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_initial_positions: n must be positive");
  std::mt19937_64 rng(seed);
  std::vector<double> out(n);
  const double lo0 = packet.support_begin();
  const double hi0 = packet.support_end();
  const double tol = 1e-12 * packet.length;
  for (auto& x : out) {
    const double u = unit_uniform(rng);
    double lo = lo0;
    double hi = hi0;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      (packet.cdf(mid) < u ? lo : hi) = mid;
    }
    x = 0.5 * (lo + hi);
  }
  return out;
}

struct IntegrationControls {
  /// Fixed RK4 step.
  double step = 0.0;
  /// Upper bound on |v| * sub-step; steps covering more ground are halved. 0 disables the cap.
  double max_displacement = 0.0;
  double t_end = 0.0;
  /// Stop once the outcome is known and every stop time has been recorded.
  bool stop_when_classified = true;
  /// Record (t, x) every this many grid steps; 0 records only the stop times.
  std::size_t record_every = 0;
  /// Times (ascending) at which the position is recorded exactly.
  std::vector<double> stop_times;
};

struct Trajectory {
  double x0 = 0.0;
  std::vector<std::pair<double, double>> samples;
  /// Position at each stop time; NaN once the trajectory became unresolved.
  std::vector<double> at_stops;
  Outcome outcome = Outcome::Unresolved;
  double classified_at = std::numeric_limits<double>::quiet_NaN();
};

/// Fixed RK4 step resolving the overlap oscillation length lambda/2 with 20 steps.
inline double default_trajectory_step(const RegionalWavefield& f) {
  return 0.5 * f.packet().wavelength() / (20.0 * f.incident_speed());
}

/// Grid step plus a displacement cap of v_min * step, where v_min is the slowest
/// overlap velocity v_g (A - B)/(A + B). Near the fast maxima of the overlap
/// velocity the field varies on a scale much shorter than lambda/2, and the cap
/// keeps those stretches as finely resolved as the slow ones.
inline IntegrationControls default_controls(const RegionalWavefield& f, double t_end) {
  IntegrationControls c;
  c.step = default_trajectory_step(f);
  const double r = std::abs(f.reflection_ratio());
  c.max_displacement = f.incident_speed() * c.step * (1.0 - r) / (1.0 + r);
  c.t_end = t_end;
  return c;
}

namespace detail {

enum class StepStatus { Ok, Rejected };

template <class Field>
StepStatus rk4_step(const Field& field, double x, double t, double h,
                    std::optional<RegionLabel> region, double& x_out, double& v_max) {
  auto ok = [&](const VelocitySample& s) {
    return s.resolved && (!region || s.label == *region);
  };
  const VelocitySample s1 = field(x, t);
  if (!ok(s1)) return StepStatus::Rejected;
  const VelocitySample s2 = field(x + 0.5 * h * s1.v, t + 0.5 * h);
  if (!ok(s2)) return StepStatus::Rejected;
  const VelocitySample s3 = field(x + 0.5 * h * s2.v, t + 0.5 * h);
  if (!ok(s3)) return StepStatus::Rejected;
  const VelocitySample s4 = field(x + h * s3.v, t + h);
  if (!ok(s4)) return StepStatus::Rejected;
  const double xn = x + h / 6.0 * (s1.v + 2.0 * s2.v + 2.0 * s3.v + s4.v);
  if (region && field(xn, t + h).label != *region) return StepStatus::Rejected;
  x_out = xn;
  v_max = std::max({std::abs(s1.v), std::abs(s2.v), std::abs(s3.v), std::abs(s4.v)});
  return StepStatus::Ok;
}

/// Advances x from t to t_next in RK4 sub-steps. A sub-step that would leave
/// the current region is cut at the boundary, located by bisection on the
/// sub-step length, and the boundary is then crossed by a step without the
/// region check.
template <class Field>
bool advance(const Field& field, double& x, double t, double t_next, const IntegrationControls& ctl) {
  const double h_ref = ctl.step;
  const double eps = 1e-9 * h_ref;
  bool crossing = false;
  while (t_next - t > eps) {
    const VelocitySample s0 = field(x, t);
    if (!s0.resolved) return false;
    const std::optional<RegionLabel> region =
        crossing ? std::nullopt : std::optional<RegionLabel>(s0.label);
    double dt = t_next - t;
    if (ctl.max_displacement > 0.0 && std::abs(s0.v) * dt > ctl.max_displacement)
      dt = std::max(ctl.max_displacement / std::abs(s0.v), 1e-6 * h_ref);
    double xn = x;
    double v_max = 0.0;
    StepStatus st;
    for (;;) {
      st = rk4_step(field, x, t, dt, region, xn, v_max);
      if (st == StepStatus::Ok && ctl.max_displacement > 0.0 &&
          v_max * dt > ctl.max_displacement && dt > 1e-6 * h_ref) {
        dt *= 0.5;
        continue;
      }
      break;
    }
    if (st == StepStatus::Ok) {
      x = xn;
      t += dt;
      crossing = false;
      continue;
    }
    if (crossing) return false;
    // A sub-step only counts as inside the region if it also honours the
    // displacement cap; otherwise a stage near a node of psi can carry the
    // particle across the boundary and into a distant cell with the same label.
    auto acceptable = [&](double h, double& xm) {
      if (rk4_step(field, x, t, h, region, xm, v_max) != StepStatus::Ok) return false;
      return ctl.max_displacement <= 0.0 || v_max * h <= ctl.max_displacement || h <= 1e-6 * h_ref;
    };
    double lo = 0.0;
    double hi = dt;
    double x_lo = x;
    while (hi - lo > 1e-7 * h_ref) {
      const double mid = 0.5 * (lo + hi);
      double xm = x;
      if (acceptable(mid, xm)) {
        lo = mid;
        x_lo = xm;
      } else {
        hi = mid;
      }
    }
    x = x_lo;
    t += lo;
    crossing = true;
  }
  return true;
}

}  // namespace detail

/// Integrates one trajectory with classical RK4 on the fixed grid t0 + n*step,
/// with the stop times inserted into the grid.
template <class Field>
Trajectory integrate(const Field& field, double x0, double t0, const IntegrationControls& ctl) {
  if (!(ctl.step > 0.0)) throw std::invalid_argument("integrate: step must be positive");
  Trajectory tr;
  tr.x0 = x0;
  tr.at_stops.assign(ctl.stop_times.size(), std::numeric_limits<double>::quiet_NaN());
  double x = x0;
  double t = t0;
  std::size_t grid_index = 0;
  std::size_t next_stop = 0;
  while (next_stop < ctl.stop_times.size() && ctl.stop_times[next_stop] < t0) ++next_stop;
  if (!field(x, t).resolved) return tr;
  if (ctl.record_every > 0) tr.samples.emplace_back(t, x);
  auto record_stop = [&] {
    while (next_stop < ctl.stop_times.size() &&
           std::abs(ctl.stop_times[next_stop] - t) <= 1e-9 * ctl.step) {
      tr.at_stops[next_stop++] = x;
    }
  };
  record_stop();
  const double t_eps = 1e-9 * ctl.step;
  while (t < ctl.t_end - t_eps) {
    const double t_grid = t0 + static_cast<double>(grid_index + 1) * ctl.step;
    double t_next = std::min(t_grid, ctl.t_end);
    if (next_stop < ctl.stop_times.size()) t_next = std::min(t_next, ctl.stop_times[next_stop]);
    if (!detail::advance(field, x, t, t_next, ctl)) return tr;
    t = t_next;
    const bool on_grid = std::abs(t - t_grid) <= t_eps;
    if (on_grid) {
      ++grid_index;
      if (ctl.record_every > 0 && grid_index % ctl.record_every == 0) tr.samples.emplace_back(t, x);
    }
    record_stop();
    if (tr.outcome == Outcome::Unresolved) {
      if (auto oc = field.outcome(x, t)) {
        tr.outcome = *oc;
        tr.classified_at = t;
      }
    }
    if (ctl.stop_when_classified && tr.outcome != Outcome::Unresolved &&
        next_stop == ctl.stop_times.size())
      break;
  }
  if (ctl.record_every > 0 && (tr.samples.empty() || tr.samples.back().first < t))
    tr.samples.emplace_back(t, x);
  return tr;
}

/// Independent trajectories over a shared read-only field, one slot per start point.
template <class Field>
std::vector<Trajectory> integrate_ensemble(const Field& field, std::span<const double> x0, double t0,
                                           const IntegrationControls& ctl,
                                           std::size_t workers = 0) {
  std::vector<Trajectory> out(x0.size());
  parallel_for(x0.size(), [&](std::size_t i) { out[i] = integrate(field, x0[i], t0, ctl); },
               workers);
  return out;
}

/// Number of trajectory pairs whose order at some recorded stop differs from their start order.
/// Adjacent pairs in start order suffice, since an order change implies an adjacent swap.
inline std::size_t count_crossings(std::span<const Trajectory> trajectories) {
  std::vector<std::size_t> order(trajectories.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return trajectories[a].x0 < trajectories[b].x0;
  });
  std::size_t violations = 0;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const auto& lo = trajectories[order[k]];
    const auto& hi = trajectories[order[k + 1]];
    const std::size_t n = std::min(lo.at_stops.size(), hi.at_stops.size());
    for (std::size_t s = 0; s < n; ++s) {
      if (std::isnan(lo.at_stops[s]) || std::isnan(hi.at_stops[s])) continue;
      if (lo.at_stops[s] > hi.at_stops[s]) {
        ++violations;
        break;
      }
    }
  }
  return violations;
}

struct CriticalTrajectoryReport {
  /// P_T L behind the incident leading edge, from the drift-velocity argument.
  double critical_offset = 0.0;
  double P_T_from_geometry = 0.0;
  double v_bar_O = 0.0;
  double tau = 0.0;
  /// Transmit/reflect boundary located by bisection on integrated trajectories.
  double bisection_offset = 0.0;
  /// Probability ahead of the bisection boundary.
  double P_T_from_bisection = 0.0;
  std::size_t trajectories_integrated = 0;
};

/// Critical trajectory: drift-velocity geometry (P_T = 2 v_bar/(v_g + v_bar)) and an
/// empirical bisection over starting offsets behind the incident leading edge.
inline CriticalTrajectoryReport critical_analysis(const RegionalWavefield& field,
                                                  double tolerance_fraction = 1e-4) {
  CriticalTrajectoryReport rep;
  const double L = field.packet().length;
  const double vg = field.incident_speed();
  const double A = field.amplitude();
  const double B = std::abs(field.reflection_ratio()) * A;
  rep.v_bar_O = drift_velocity_overlap(A, B, field.k().k0, field.constants());
  rep.P_T_from_geometry = 2.0 * rep.v_bar_O / (vg + rep.v_bar_O);
  rep.tau = 0.5 * rep.P_T_from_geometry * L / vg;
  rep.critical_offset = rep.P_T_from_geometry * L;

  const RegionalVelocityField vf(field);
  const IntegrationControls ctl = default_controls(field, field.T() + L / vg);
  const double t0 = field.contact_time();
  const double lead = vg * t0;
  auto outcome_at = [&](double offset) {
    ++rep.trajectories_integrated;
    return integrate(vf, lead - offset, t0, ctl).outcome;
  };
  double lo = 0.0;
  double hi = L;
  if (outcome_at(lo) != Outcome::Transmitted || outcome_at(hi) != Outcome::Reflected)
    throw std::runtime_error("critical_analysis: edge trajectories do not bracket the boundary");
  while (hi - lo > tolerance_fraction * L) {
    const double mid = 0.5 * (lo + hi);
    const Outcome o = outcome_at(mid);
    if (o == Outcome::Transmitted) {
      lo = mid;
    } else if (o == Outcome::Reflected) {
      hi = mid;
    } else {
      throw std::runtime_error(
          "critical_analysis: unresolved trajectory inside the bracket; tighten the integrator");
    }
  }
  rep.bisection_offset = 0.5 * (lo + hi);
  rep.P_T_from_bisection = 1.0 - field.packet().cdf(-rep.bisection_offset);
  return rep;
}

/// Guidance field built from the oracle's discrete j and rho, linearly
/// interpolated in x. Holds one time slice.
class OracleSlice {
 public:
  OracleSlice() = default;
  OracleSlice(const ComplexField& f, const PhysicalConstants& c, double density_floor)
      : grid_(f.grid), rho_(density(f)), j_(current(f, c)), floor_(density_floor) {}

  VelocitySample operator()(double x) const {
    VelocitySample s;
    const double u = (x - grid_.x_min) / grid_.dx();
    if (!(u >= 1.0) || !(u < static_cast<double>(grid_.n_points) - 2.0)) return s;
    const auto i = static_cast<std::size_t>(u);
    const double f = u - static_cast<double>(i);
    const double rho = (1.0 - f) * rho_[i] + f * rho_[i + 1];
    if (!(rho > floor_)) return s;
    const double j = (1.0 - f) * j_[i] + f * j_[i + 1];
    s.v = j / rho;
    s.resolved = true;
    s.label = RegionLabel::Vacuum;
    return s;
  }

 private:
  Grid1D grid_;
  std::vector<double> rho_;
  std::vector<double> j_;
  double floor_ = 0.0;
};

struct OracleEnsembleResult {
  std::vector<double> x0;
  std::vector<Outcome> outcomes;
  /// positions[s][i]: particle i at stop s (NaN if unresolved by then).
  std::vector<std::vector<double>> positions;
  /// Actual stop times: the first solver time at or after each requested time.
  std::vector<double> stop_times;
};

/// Advances the oracle and the particles together: each RK4 step spans two
/// solver steps so that the stage velocities use exact snapshots. Particles
/// start at the oracle's current time. Each requested stop is taken at the
/// first solver time at or after it, where on_stop(s, field, positions) sees the
/// wavefunction and the positions. Outcomes are read at t_end: right of the potential region is
/// transmitted, left of the origin is reflected.
template <class OnStop>
OracleEnsembleResult integrate_oracle_ensemble(OracleSimulation& sim, std::span<const double> x0,
                                               std::vector<double> stop_times, double t_end,
                                               double interaction_end, double density_floor,
                                               OnStop&& on_stop) {
  std::sort(stop_times.begin(), stop_times.end());
  OracleEnsembleResult res;
  res.x0.assign(x0.begin(), x0.end());
  const std::size_t n = x0.size();
  std::vector<double> x(x0.begin(), x0.end());
  std::vector<char> alive(n, 1);
  const auto& c = sim.constants();
  std::size_t next_stop = 0;
  while (next_stop < stop_times.size() && stop_times[next_stop] < sim.time() - 1e-9 * sim.dt())
    ++next_stop;
  auto record = [&] {
    while (next_stop < stop_times.size() && stop_times[next_stop] <= sim.time() + 1e-9 * sim.dt()) {
      std::vector<double> p(n, std::numeric_limits<double>::quiet_NaN());
      for (std::size_t i = 0; i < n; ++i)
        if (alive[i]) p[i] = x[i];
      res.positions.push_back(std::move(p));
      res.stop_times.push_back(sim.time());
      on_stop(res.positions.size() - 1, sim.field(), std::span<const double>(res.positions.back()));
      ++next_stop;
    }
  };
  record();
  OracleSlice s0(sim.field(), c, density_floor);
  while (sim.time() < t_end - 1e-9 * sim.dt()) {
    const double h = 2.0 * sim.dt();
    sim.step();
    const OracleSlice s1(sim.field(), c, density_floor);
    sim.step();
    OracleSlice s2(sim.field(), c, density_floor);
    parallel_for(n, [&](std::size_t i) {
      if (!alive[i]) return;
      const double xi = x[i];
      const VelocitySample k1 = s0(xi);
      const VelocitySample k2 = k1.resolved ? s1(xi + 0.5 * h * k1.v) : VelocitySample{};
      const VelocitySample k3 = k2.resolved ? s1(xi + 0.5 * h * k2.v) : VelocitySample{};
      const VelocitySample k4 = k3.resolved ? s2(xi + h * k3.v) : VelocitySample{};
      if (!k4.resolved) {
        alive[i] = 0;
        return;
      }
      x[i] = xi + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    });
    s0 = std::move(s2);
    record();
  }
  res.outcomes.assign(n, Outcome::Unresolved);
  for (std::size_t i = 0; i < n; ++i) {
    if (!alive[i]) continue;
    if (x[i] > interaction_end) res.outcomes[i] = Outcome::Transmitted;
    else if (x[i] < 0.0) res.outcomes[i] = Outcome::Reflected;
  }
  return res;
}

inline OracleEnsembleResult integrate_oracle_ensemble(OracleSimulation& sim, std::span<const double> x0,
                                                      std::vector<double> stop_times, double t_end,
                                                      double interaction_end, double density_floor) {
  return integrate_oracle_ensemble(sim, x0, std::move(stop_times), t_end, interaction_end,
                                   density_floor, [](std::size_t, const ComplexField&, std::span<const double>) {});
}

}  // namespace pilotwave
