#pragma once

// Ensemble statistics: transmission estimates with binomial confidence
// intervals, KS distance between particle positions and |psi|^2, histograms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pilotwave/oracle.hpp"
#include "pilotwave/regional_wavefield.hpp"
#include "pilotwave/trajectories.hpp"

namespace pilotwave {

inline constexpr double kZ95 = 1.959963984540054;
/// Runs with more unresolved trajectories than this fraction are flagged invalid.
inline constexpr double kMaxUnresolvedFraction = 0.01;

struct EnsembleResult {
  std::size_t n = 0;
  std::size_t n_transmitted = 0;
  std::size_t n_reflected = 0;
  std::size_t n_unresolved = 0;
  double P_T_hat = 0.0;
  double ci_halfwidth = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<std::pair<double, double>> ks_by_time;

  double unresolved_fraction() const {
    return n == 0 ? 0.0 : static_cast<double>(n_unresolved) / static_cast<double>(n);
  }
  bool valid() const { return unresolved_fraction() < kMaxUnresolvedFraction; }
  bool ci_contains(double p) const { return p >= ci_low && p <= ci_high; }
};

/// Point estimate of P_T over resolved outcomes with a 95% interval: the normal
/// approximation, or the exact Clopper-Pearson interval when every resolved
/// outcome is the same (where the normal interval collapses to a point).
inline EnsembleResult empirical_probabilities(std::span<const Outcome> outcomes) {
  EnsembleResult r;
  r.n = outcomes.size();
  for (Outcome o : outcomes) {
    if (o == Outcome::Transmitted) ++r.n_transmitted;
    else if (o == Outcome::Reflected) ++r.n_reflected;
    else ++r.n_unresolved;
  }
  const std::size_t m = r.n_transmitted + r.n_reflected;
  if (m == 0) throw std::invalid_argument("empirical_probabilities: no resolved outcomes");
  const double md = static_cast<double>(m);
  r.P_T_hat = static_cast<double>(r.n_transmitted) / md;
  if (r.n_transmitted == m) {
    r.ci_low = std::pow(0.025, 1.0 / md);
    r.ci_high = 1.0;
    r.ci_halfwidth = 0.5 * (r.ci_high - r.ci_low);
  } else if (r.n_transmitted == 0) {
    r.ci_low = 0.0;
    r.ci_high = 1.0 - std::pow(0.025, 1.0 / md);
    r.ci_halfwidth = 0.5 * (r.ci_high - r.ci_low);
  } else {
    r.ci_halfwidth = kZ95 * std::sqrt(r.P_T_hat * (1.0 - r.P_T_hat) / md);
    r.ci_low = std::max(0.0, r.P_T_hat - r.ci_halfwidth);
    r.ci_high = std::min(1.0, r.P_T_hat + r.ci_halfwidth);
  }
  return r;
}

/// Piecewise-linear CDF tabulated on increasing abscissae.
class GridCdf {
 public:
  GridCdf(std::vector<double> x, std::vector<double> cdf) : x_(std::move(x)), F_(std::move(cdf)) {
    if (x_.size() < 2 || x_.size() != F_.size()) throw std::invalid_argument("GridCdf: bad table");
  }

  /// Trapezoidal CDF of a sampled density, normalized to end at one.
  static GridCdf from_density(std::vector<double> x, std::span<const double> rho) {
    if (x.size() != rho.size() || x.size() < 2) throw std::invalid_argument("GridCdf: bad density");
    std::vector<double> F(x.size(), 0.0);
    for (std::size_t i = 1; i < x.size(); ++i) {
      if (!(rho[i] >= 0.0) || !std::isfinite(rho[i]))
        throw std::domain_error("GridCdf: density must be finite and non-negative");
      F[i] = F[i - 1] + 0.5 * (rho[i] + rho[i - 1]) * (x[i] - x[i - 1]);
    }
    const double total = F.back();
    if (!(total > 0.0) || !std::isfinite(total))
      throw std::domain_error("GridCdf: density slice is not normalizable");
    for (auto& f : F) f /= total;
    return GridCdf(std::move(x), std::move(F));
  }

  double operator()(double x) const {
    if (x <= x_.front()) return 0.0;
    if (x >= x_.back()) return 1.0;
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin());
    const double f = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
    return F_[i - 1] + f * (F_[i] - F_[i - 1]);
  }

 private:
  std::vector<double> x_;
  std::vector<double> F_;
};

/// Two-sided KS distance sup |F_n - F| between the empirical CDF of the samples and F.
template <class Cdf>
double ks_statistic(std::vector<double> samples, const Cdf& F) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = F(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return std::clamp(d, 0.0, 1.0);
}

inline constexpr std::size_t kMinKsSamples = 100;

/// CDF of the normalized regional |psi(., t)|^2 by trapezoidal quadrature.
inline GridCdf regional_density_cdf(const RegionalWavefield& field, double t,
                                    double spacing_wavelengths = 1.0 / 64.0) {
  const auto [lo, hi] = field.support_window(t);
  const double h = spacing_wavelengths * field.packet().wavelength();
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / h)) + 1;
  std::vector<double> x(n);
  std::vector<double> rho(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    rho[i] = field.density(x[i], t);
  }
  return GridCdf::from_density(std::move(x), rho);
}

inline GridCdf field_density_cdf(const ComplexField& f) {
  std::vector<double> x(f.grid.n_points);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = f.grid.x(i);
  return GridCdf::from_density(std::move(x), density(f));
}

/// KS distance between positions (NaN entries dropped) and the regional |psi(., t)|^2.
inline double equivariance_ks(std::span<const double> positions, const RegionalWavefield& field,
                              double t) {
  std::vector<double> xs;
  xs.reserve(positions.size());
  for (double x : positions)
    if (!std::isnan(x)) xs.push_back(x);
  if (xs.size() < kMinKsSamples) throw std::invalid_argument("equivariance_ks: need at least 100 positions");
  return ks_statistic(std::move(xs), regional_density_cdf(field, t));
}

/// KS distance between positions and the |psi|^2 of a numerical field slice.
inline double equivariance_ks(std::span<const double> positions, const ComplexField& field) {
  std::vector<double> xs;
  xs.reserve(positions.size());
  for (double x : positions)
    if (!std::isnan(x)) xs.push_back(x);
  if (xs.size() < kMinKsSamples) throw std::invalid_argument("equivariance_ks: need at least 100 positions");
  return ks_statistic(std::move(xs), field_density_cdf(field));
}

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;

  double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
  double center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * bin_width(); }
};

/// Equal-width histogram over the occupied window [min, max] of the finite values.
inline Histogram make_histogram(std::span<const double> values, std::size_t bins = 200) {
  if (bins == 0) throw std::invalid_argument("make_histogram: bins must be positive");
  Histogram h;
  h.counts.assign(bins, 0);
  bool any = false;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    if (!any) h.lo = h.hi = v;
    h.lo = std::min(h.lo, v);
    h.hi = std::max(h.hi, v);
    any = true;
  }
  if (!any) throw std::invalid_argument("make_histogram: no finite values");
  if (h.hi == h.lo) h.hi = h.lo + 1.0;
  const double bw = h.bin_width();
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    const auto i = std::min(bins - 1, static_cast<std::size_t>((v - h.lo) / bw));
    ++h.counts[i];
  }
  return h;
}

}  // namespace pilotwave
