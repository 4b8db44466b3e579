#pragma once

// Crank-Nicolson solver for the 1D time-dependent Schroedinger equation and
// discrete density / current / continuity diagnostics. This is the
// brute-force reference against which the regional model is checked.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#if defined(__SSE2__) || defined(_M_X64)
#include <xmmintrin.h>
#define PILOTWAVE_HAS_MXCSR 1
#endif

#include "pilotwave/analytic_scattering.hpp"
#include "pilotwave/regional_wavefield.hpp"

namespace pilotwave {

struct Grid1D {
  double x_min = 0.0;
  double x_max = 0.0;
  std::size_t n_points = 0;

  static Grid1D make(double x_min, double x_max, std::size_t n_points) {
    if (n_points < 2) throw ConfigurationError("grid needs at least two points");
    if (!(x_max > x_min)) throw ConfigurationError("grid: x_max must exceed x_min");
    return {x_min, x_max, n_points};
  }

  /// Grid with spacing dx covering [lo, hi] on which x = 0 is a node.
  static Grid1D aligned(double lo, double hi, double dx) {
    if (!(dx > 0.0)) throw ConfigurationError("grid: dx must be positive");
    const double i_lo = std::floor(lo / dx);
    const double i_hi = std::ceil(hi / dx);
    return make(i_lo * dx, i_hi * dx, static_cast<std::size_t>(i_hi - i_lo) + 1);
  }

  double dx() const { return (x_max - x_min) / static_cast<double>(n_points - 1); }
  double x(std::size_t i) const { return x_min + dx() * static_cast<double>(i); }
  bool same_as(const Grid1D& o) const {
    return n_points == o.n_points && x_min == o.x_min && x_max == o.x_max;
  }
};

struct ComplexField {
  Grid1D grid;
  std::vector<complex> values;
  double time = 0.0;
};

/// Potential sampled at the nodes; a node sitting exactly on a jump gets the mean value.
inline std::vector<double> sample_potential(const Grid1D& g, const ScatterScenario& s) {
  std::vector<double> v(g.n_points);
  const double dx = g.dx();
  const double a = s.barrier_width();
  for (std::size_t i = 0; i < g.n_points; ++i) {
    double x = g.x(i);
    // snap nodes that are within roundoff of a discontinuity
    if (std::abs(x) < 1e-9 * dx) x = 0.0;
    if (s.is_barrier() && std::abs(x - a) < 1e-9 * dx) x = a;
    v[i] = s.potential_at(x);
  }
  return v;
}

namespace detail {

/// Treats subnormal doubles as zero while alive. Far from the packet the
/// propagated amplitude decays into the subnormal range, where x86 arithmetic
/// is roughly ten times slower; those values are far below any tolerance.
class FlushSubnormals {
 public:
#ifdef PILOTWAVE_HAS_MXCSR
  FlushSubnormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
  ~FlushSubnormals() { _mm_setcsr(saved_); }

 private:
  unsigned saved_;
#endif
 public:
  FlushSubnormals(const FlushSubnormals&) = delete;
  FlushSubnormals& operator=(const FlushSubnormals&) = delete;
};

}  // namespace detail

/// Crank-Nicolson propagator with Dirichlet ends. The tridiagonal system has
/// constant off-diagonals, so its Thomas factorization is computed once.
class CrankNicolson {
 public:
  CrankNicolson(const Grid1D& grid, std::vector<double> potential, double dt,
                const PhysicalConstants& c = {})
      : grid_(grid), V_(std::move(potential)), dt_(dt), c_(c) {
    if (V_.size() != grid_.n_points) throw ConfigurationError("potential size does not match grid");
    if (!(dt > 0.0)) throw ConfigurationError("dt must be positive");
    c_.validate();
    const double dx = grid_.dx();
    const complex I(0.0, 1.0);
    off_ = -I * c_.hbar * dt_ / (4.0 * c_.mass * dx * dx);
    const std::size_t n = grid_.n_points;
    diag_rhs_.resize(n);
    inv_pivot_.resize(n);
    upper_.resize(n);
    complex prev_upper = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const complex pot = I * dt_ * V_[i] / (2.0 * c_.hbar);
      const complex diag = 1.0 - 2.0 * off_ + pot;
      diag_rhs_[i] = 1.0 + 2.0 * off_ - pot;
      const complex pivot = (i == 1) ? diag : diag - off_ * prev_upper;
      inv_pivot_[i] = 1.0 / pivot;
      upper_[i] = off_ * inv_pivot_[i];
      prev_upper = upper_[i];
    }
    work_.resize(n);
  }

  double dt() const { return dt_; }
  const Grid1D& grid() const { return grid_; }
  const std::vector<double>& potential() const { return V_; }

  void step(ComplexField& f) const {
    if (!f.grid.same_as(grid_)) throw std::invalid_argument("field grid does not match propagator");
    auto& psi = f.values;
    const std::size_t n = grid_.n_points;
    if (n < 3) return;
    const detail::FlushSubnormals ftz;
    // forward sweep on the right-hand side
    complex prev = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const complex rhs = diag_rhs_[i] * psi[i] - off_ * (psi[i + 1] + psi[i - 1]);
      prev = (i == 1 ? rhs : rhs - off_ * prev) * inv_pivot_[i];
      work_[i] = prev;
    }
    psi[0] = 0.0;
    psi[n - 1] = 0.0;
    complex next = 0.0;
    for (std::size_t i = n - 2; i >= 1; --i) {
      next = work_[i] - upper_[i] * next;
      psi[i] = next;
    }
    f.time += dt_;
  }

 private:
  Grid1D grid_;
  std::vector<double> V_;
  double dt_;
  PhysicalConstants c_;
  complex off_;
  std::vector<complex> diag_rhs_;
  std::vector<complex> inv_pivot_;
  std::vector<complex> upper_;
  mutable std::vector<complex> work_;
};

/// Rejects grids coarser than a twentieth of the shortest wavelength 2 pi / k_max.
inline void check_resolution(const Grid1D& g, double k_max) {
  if (!(k_max > 0.0)) throw ConfigurationError("resolution check needs a positive wavenumber");
  if (g.dx() > wavelength(k_max) / 20.0)
    throw ConfigurationError("grid under-resolves the wavelength (dx > lambda/20)");
}

inline ComplexField evolve(ComplexField field, std::span<const double> potential, double dt,
                           std::size_t steps, const PhysicalConstants& c, double k_max) {
  check_resolution(field.grid, k_max);
  CrankNicolson cn(field.grid, std::vector<double>(potential.begin(), potential.end()), dt, c);
  for (std::size_t s = 0; s < steps; ++s) cn.step(field);
  return field;
}

inline std::vector<double> density(const ComplexField& f) {
  std::vector<double> rho(f.values.size());
  std::transform(f.values.begin(), f.values.end(), rho.begin(),
                 [](const complex& z) { return std::norm(z); });
  return rho;
}

/// j = (hbar/m) Im(psi* dpsi/dx) with central differences; zero at the two end nodes.
inline std::vector<double> current(const ComplexField& f, const PhysicalConstants& c = {}) {
  const std::size_t n = f.values.size();
  std::vector<double> j(n, 0.0);
  const double scale = c.hbar / (c.mass * 2.0 * f.grid.dx());
  for (std::size_t i = 1; i + 1 < n; ++i) {
    j[i] = scale * std::imag(std::conj(f.values[i]) * (f.values[i + 1] - f.values[i - 1]));
  }
  return j;
}

inline double total_probability(const ComplexField& f) {
  double s = 0.0;
  for (const auto& z : f.values) s += std::norm(z);
  return s * f.grid.dx();
}

/// Sum of |psi|^2 dx over nodes with lo <= x <= hi.
inline double probability_in(const ComplexField& f, double lo, double hi) {
  if (hi < lo) return 0.0;
  if (lo < f.grid.x_min - 0.5 * f.grid.dx() || hi > f.grid.x_max + 0.5 * f.grid.dx())
    throw std::out_of_range("probability_in: interval outside the grid");
  double s = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double x = f.grid.x(i);
    if (x >= lo && x <= hi) s += std::norm(f.values[i]);
  }
  return s * f.grid.dx();
}

/// Discrete L2 norm (over interior nodes, weighted by dx) of
/// d rho/dt + dj/dx between two consecutive snapshots. The time derivative is a
/// forward difference and the current is averaged over both snapshots, so the
/// residual is centred at the half step.
inline double continuity_residual(const ComplexField& before, const ComplexField& after,
                                  const PhysicalConstants& c = {}) {
  if (!before.grid.same_as(after.grid) || before.values.size() != after.values.size())
    throw std::invalid_argument("continuity_residual: mismatched grids");
  const double dt = after.time - before.time;
  if (!(dt > 0.0)) throw std::invalid_argument("continuity_residual: snapshots not ordered in time");
  const auto j0 = current(before, c);
  const auto j1 = current(after, c);
  const double dx = before.grid.dx();
  const std::size_t n = before.values.size();
  double sum = 0.0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double drho = (std::norm(after.values[i]) - std::norm(before.values[i])) / dt;
    const double djdx =
        0.5 * ((j0[i + 1] - j0[i - 1]) + (j1[i + 1] - j1[i - 1])) / (2.0 * dx);
    const double r = drho + djdx;
    sum += r * r;
  }
  return std::sqrt(sum * dx);
}

/// Snapshot CSV rows: t,x,re_psi,im_psi (header written by the caller once).
inline void write_snapshot_csv(std::ostream& os, const ComplexField& f, std::size_t stride = 1) {
  const auto old = os.precision(12);
  for (std::size_t i = 0; i < f.values.size(); i += std::max<std::size_t>(stride, 1)) {
    os << f.time << ',' << f.grid.x(i) << ',' << f.values[i].real() << ',' << f.values[i].imag()
       << '\n';
  }
  os.precision(old);
}

inline constexpr const char* kSnapshotCsvHeader = "t,x,re_psi,im_psi";

struct OracleResolution {
  double points_per_wavelength = 50.0;
  /// dt = courant * dx / v_g
  double courant = 0.5;
  /// Free space beyond the farthest nominal edge at t_end. Tunneling favours the
  /// fast components of the packet, so the transmitted side needs more than the
  /// dispersion-free estimate.
  double margin_wavelengths = 40.0;
  /// Free travel before the incident support reaches the potential.
  double gap_wavelengths = 2.0;
};

/// The oracle set up for one scattering scenario: domain sized to hold the
/// whole run, the incident packet placed ahead of the potential and the
/// clock aligned with the regional model (t = 0 at nominal contact).
class OracleSimulation {
 public:
  OracleSimulation(const RegionalWavefield& model, double t_end, OracleResolution res = {},
                   bool free_particle = false)
      : res_(res), constants_(model.constants()) {
    if (!(res.points_per_wavelength > 0.0) || !(res.courant > 0.0))
      throw ConfigurationError("oracle resolution must be positive");
    const auto& pk = model.packet();
    const double lam = pk.wavelength();
    const double v = model.incident_speed();
    const double a = model.barrier_width();
    double dx = lam / res.points_per_wavelength;
    if (model.is_barrier() && !free_particle) dx = a / std::ceil(a / dx);  // x = a on a node

    t_start_ = model.contact_time() - res.gap_wavelengths * lam / v;
    if (t_end < t_start_) throw ConfigurationError("oracle: t_end precedes the start of the run");
    const double w5 = pk.support_end() - pk.leading_edge;
    const double margin = res.margin_wavelengths * lam;
    const double travel = v * std::max(t_end, 0.0);
    const double lo = -(pk.length + w5 + res.gap_wavelengths * lam + travel + margin);
    const double hi = a + travel + w5 + margin;
    const Grid1D grid = Grid1D::aligned(lo, hi, dx);
    check_resolution(grid, model.k().k0);

    V_ = free_particle ? std::vector<double>(grid.n_points, 0.0)
                       : sample_potential(grid, model.scenario());
    dt_ = res.courant * grid.dx() / v;
    cn_.emplace(grid, V_, dt_, constants_);

    field_.grid = grid;
    field_.time = t_start_;
    field_.values.resize(grid.n_points);
    const PlaneWavePacket start = model.incident_packet_at(t_start_);
    const complex I(0.0, 1.0);
    for (std::size_t i = 0; i < grid.n_points; ++i) {
      const double x = grid.x(i);
      field_.values[i] = start.envelope(x) * std::exp(I * pk.k0 * x);
    }
    field_.values.front() = field_.values.back() = 0.0;
    const double norm = std::sqrt(total_probability(field_));
    for (auto& z : field_.values) z /= norm;
    initial_norm_ = total_probability(field_);
  }

  const Grid1D& grid() const { return field_.grid; }
  const ComplexField& field() const { return field_; }
  const std::vector<double>& potential() const { return V_; }
  double time() const { return field_.time; }
  double dt() const { return dt_; }
  double t_start() const { return t_start_; }
  const PhysicalConstants& constants() const { return constants_; }

  void step() { cn_->step(field_); }

  /// Advances to exactly t (the last step is shortened if needed).
  void advance_to(double t) {
    if (t < field_.time - 1e-12 * dt_) throw std::invalid_argument("oracle cannot step backwards");
    while (field_.time + dt_ <= t + 1e-9 * dt_) step();
    const double rest = t - field_.time;
    if (rest > 1e-9 * dt_) {
      CrankNicolson partial(field_.grid, V_, rest, constants_);
      partial.step(field_);
    }
    field_.time = t;
  }

  double norm_drift() const { return std::abs(total_probability(field_) - initial_norm_); }

  /// Probability within `cells` grid spacings of either domain end.
  double boundary_leakage(std::size_t cells = 5) const {
    const double dx = grid().dx();
    double s = 0.0;
    const std::size_t n = field_.values.size();
    for (std::size_t i = 0; i <= cells && i < n; ++i) {
      s += std::norm(field_.values[i]) + std::norm(field_.values[n - 1 - i]);
    }
    return s * dx;
  }

 private:
  OracleResolution res_;
  PhysicalConstants constants_;
  std::vector<double> V_;
  double dt_ = 0.0;
  double t_start_ = 0.0;
  double initial_norm_ = 1.0;
  ComplexField field_;
  std::optional<CrankNicolson> cn_;
};

}  // namespace pilotwave
