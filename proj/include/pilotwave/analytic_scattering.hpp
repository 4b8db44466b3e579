#pragma once

// Closed-form plane-wave scattering off a potential step (E > V0) and
// tunneling through a rectangular barrier (0 < E < V0).

#include <cmath>
#include <complex>
#include <variant>

#include "pilotwave/constants.hpp"

namespace pilotwave {

using complex = std::complex<double>;

struct StepPotential {
  double V0 = 0.0;
};

struct BarrierPotential {
  double V0 = 0.0;
  double width = 0.0;
};

using Potential = std::variant<StepPotential, BarrierPotential>;

struct ScatterScenario {
  Potential potential;
  double energy = 0.0;
  PhysicalConstants constants{};

  static ScatterScenario step(double V0, double energy, PhysicalConstants c = {}) {
    return {StepPotential{V0}, energy, c};
  }
  static ScatterScenario barrier(double V0, double width, double energy, PhysicalConstants c = {}) {
    return {BarrierPotential{V0, width}, energy, c};
  }

  bool is_barrier() const { return std::holds_alternative<BarrierPotential>(potential); }
  double V0() const {
    return std::visit([](const auto& p) { return p.V0; }, potential);
  }
  /// Right end of the interaction region: 0 for the step, a for the barrier.
  double barrier_width() const {
    if (const auto* b = std::get_if<BarrierPotential>(&potential)) return b->width;
    return 0.0;
  }
  /// Potential at x; at a discontinuity the mean of both sides is returned.
  double potential_at(double x) const {
    const double v0 = V0();
    if (!is_barrier()) return x > 0.0 ? v0 : (x < 0.0 ? 0.0 : 0.5 * v0);
    const double a = barrier_width();
    if (x < 0.0 || x > a) return 0.0;
    if (x == 0.0 || x == a) return 0.5 * v0;
    return v0;
  }
};

struct Wavenumbers {
  double k0 = 0.0;
  double kappa0 = 0.0;
};

/// k0 from the incident energy; kappa0 from |E - V0| on the far side / inside the barrier.
inline Wavenumbers wavenumbers(const ScatterScenario& s) {
  s.constants.validate();
  const double v0 = s.V0();
  if (!(v0 > 0.0)) throw UnsupportedRegime("V0 must be positive");
  const double h2 = s.constants.hbar * s.constants.hbar;
  const double two_m = 2.0 * s.constants.mass;
  if (s.is_barrier()) {
    if (!(s.barrier_width() > 0.0)) throw UnsupportedRegime("barrier width must be positive");
    if (!(s.energy > 0.0) || !(s.energy < v0))
      throw UnsupportedRegime("barrier tunneling requires 0 < E < V0");
    return {std::sqrt(two_m * s.energy / h2), std::sqrt(two_m * (v0 - s.energy) / h2)};
  }
  if (!(s.energy > v0)) throw UnsupportedRegime("step scattering requires E > V0");
  return {std::sqrt(two_m * s.energy / h2), std::sqrt(two_m * (s.energy - v0) / h2)};
}

struct StepSolution {
  double B_over_A = 0.0;
  double C_over_A = 0.0;
  double P_R = 0.0;
  double P_T = 0.0;
};

inline StepSolution step_solution(const Wavenumbers& k) {
  if (!(k.k0 > 0.0) || !(k.kappa0 > 0.0))
    throw std::invalid_argument("step_solution: wavenumbers must be positive");
  const double sum = k.k0 + k.kappa0;
  StepSolution s;
  s.B_over_A = (k.k0 - k.kappa0) / sum;
  s.C_over_A = 2.0 * k.k0 / sum;
  s.P_R = s.B_over_A * s.B_over_A;
  // The transmitted flux ratio carries the factor 4, not 2, so that P_R + P_T = 1.
  s.P_T = 4.0 * k.k0 * k.kappa0 / (sum * sum);
  return s;
}

struct BarrierSolution {
  complex B_over_A;
  complex F_over_A;
  complex C_over_A;
  complex D_over_A;
  /// D/A * exp(kappa0 a); finite for any barrier opacity.
  complex D_scaled_over_A;
  /// C/A * exp(-kappa0 a); finite for any barrier opacity.
  complex C_scaled_over_A;
  double P_T = 0.0;
  double P_R = 0.0;
  /// arg(B/A), the phase entering the overlap interference term.
  double phi = 0.0;
  /// arg(D/C).
  double theta = 0.0;
};

/// Amplitudes for A = 1. Hyperbolic functions are carried as tanh and a
/// scaled sech so that opaque barriers (kappa0 a in the hundreds) neither
/// overflow nor produce NaN; P_T then underflows smoothly to zero.
inline BarrierSolution barrier_solution(const Wavenumbers& k, double a) {
  if (!(k.k0 > 0.0) || !(k.kappa0 > 0.0) || !(a > 0.0))
    throw std::invalid_argument("barrier_solution: wavenumbers and width must be positive");
  const double k0 = k.k0;
  const double kap = k.kappa0;
  const double ka = kap * a;
  const double e2 = std::exp(-2.0 * ka);
  const double th = std::tanh(ka);
  const double sech = 2.0 * std::exp(-ka) / (1.0 + e2);
  const double exp_sech = 2.0 / (1.0 + e2);          // e^{ka} sech
  const double invexp_sech = 2.0 * e2 / (1.0 + e2);  // e^{-ka} sech
  const complex I(0.0, 1.0);

  const double sum2 = kap * kap + k0 * k0;
  const double diff2 = kap * kap - k0 * k0;
  const complex den = diff2 * th - 2.0 * I * k0 * kap;  // denominator / cosh(ka)

  BarrierSolution s;
  s.B_over_A = -sum2 * th / den;
  const complex f_phase = -2.0 * I * k0 * kap / den;  // F e^{ik a} cosh(ka) / A
  s.F_over_A = f_phase * sech * std::exp(-I * k0 * a);
  s.C_over_A = f_phase * exp_sech * (1.0 - I * k0 / kap) / 2.0;
  s.D_over_A = f_phase * invexp_sech * (1.0 + I * k0 / kap) / 2.0;
  s.D_scaled_over_A = f_phase * sech * (1.0 + I * k0 / kap) / 2.0;
  s.C_scaled_over_A = f_phase * sech * (1.0 - I * k0 / kap) / 2.0;

  const double t2 = sum2 * sum2 * th * th;
  const double s2 = 4.0 * k0 * k0 * kap * kap * sech * sech;
  s.P_T = s2 / (t2 + s2);
  s.P_R = t2 / (t2 + s2);
  s.phi = std::arg(s.B_over_A);
  s.theta = 2.0 * std::atan(k0 / kap);
  return s;
}

struct CfrFields {
  double current = 0.0;
  double density = 0.0;
  double velocity = 0.0;
};

/// Current, density and guidance velocity inside the barrier (0 <= x <= a) for A = 1.
inline CfrFields cfr_fields(const BarrierSolution& sol, const Wavenumbers& k, double a, double x,
                            const PhysicalConstants& c = {}) {
  if (x < 0.0 || x > a) throw std::out_of_range("cfr_fields: x outside [0, a]");
  const double kap = k.kappa0;
  const double c2 = std::norm(sol.C_scaled_over_A);  // |C|^2 e^{-2 kappa a}
  const double hyper = std::cosh(2.0 * kap * (a - x));
  CfrFields f;
  f.current = 2.0 * c.hbar * kap / c.mass * c2 * std::sin(sol.theta);
  f.density = 2.0 * c2 * (hyper + std::cos(sol.theta));
  f.velocity = c.hbar * kap / c.mass * std::sin(sol.theta) / (std::cos(sol.theta) + hyper);
  return f;
}

/// Stationary step wavefunction (A = 1) and its derivative.
inline std::pair<complex, complex> step_stationary_psi(const StepSolution& s, const Wavenumbers& k,
                                                       double x) {
  const complex I(0.0, 1.0);
  if (x < 0.0) {
    const complex in = std::exp(I * k.k0 * x);
    const complex out = s.B_over_A * std::exp(-I * k.k0 * x);
    return {in + out, I * k.k0 * (in - out)};
  }
  const complex tr = s.C_over_A * std::exp(I * k.kappa0 * x);
  return {tr, I * k.kappa0 * tr};
}

/// Stationary barrier wavefunction (A = 1) and its derivative.
inline std::pair<complex, complex> barrier_stationary_psi(const BarrierSolution& s,
                                                          const Wavenumbers& k, double a,
                                                          double x) {
  const complex I(0.0, 1.0);
  if (x < 0.0) {
    const complex in = std::exp(I * k.k0 * x);
    const complex out = s.B_over_A * std::exp(-I * k.k0 * x);
    return {in + out, I * k.k0 * (in - out)};
  }
  if (x <= a) {
    const complex decay = s.C_scaled_over_A * std::exp(k.kappa0 * (a - x));
    const complex grow = s.D_scaled_over_A * std::exp(-k.kappa0 * (a - x));
    return {decay + grow, k.kappa0 * (grow - decay)};
  }
  const complex tr = s.F_over_A * std::exp(I * k.k0 * x);
  return {tr, I * k.k0 * tr};
}

}  // namespace pilotwave
