#pragma once

// CSV and SVG writers. Numbers go through a fixed printf format so that
// reruns with the same inputs produce byte-identical files.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pilotwave/regional_wavefield.hpp"
#include "pilotwave/stats.hpp"
#include "pilotwave/trajectories.hpp"

namespace pilotwave {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct SummaryRow {
  std::string quantity;
  double value = 0.0;
  double ci_low = std::nan("");
  double ci_high = std::nan("");
};

inline void write_summary_csv(std::ostream& os, std::span<const SummaryRow> rows) {
  os << "quantity,value,ci_low,ci_high\n";
  for (const auto& r : rows)
    os << r.quantity << ',' << fmt(r.value) << ',' << fmt(r.ci_low) << ',' << fmt(r.ci_high) << '\n';
}

inline void write_trajectory_csv(std::ostream& os, std::span<const Trajectory> trajectories) {
  os << "trajectory_id,t,x\n";
  for (std::size_t i = 0; i < trajectories.size(); ++i)
    for (const auto& [t, x] : trajectories[i].samples) os << i << ',' << fmt(t) << ',' << fmt(x) << '\n';
}

inline void write_ensemble_csv(std::ostream& os, std::span<const double> x0,
                               std::span<const Outcome> outcomes) {
  os << "trajectory_id,x0,outcome\n";
  for (std::size_t i = 0; i < x0.size(); ++i)
    os << i << ',' << fmt(x0[i]) << ',' << to_string(outcomes[i]) << '\n';
}

inline void write_ks_csv(std::ostream& os, std::span<const std::pair<double, double>> ks,
                         std::size_t n) {
  os << "t,ks,n\n";
  for (const auto& [t, d] : ks) os << fmt(t) << ',' << fmt(d) << ',' << n << '\n';
}

inline void write_histogram_csv(std::ostream& os, double t, const Histogram& h, bool header) {
  if (header) os << "t,x_center,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    os << fmt(t) << ',' << fmt(h.center(i)) << ',' << h.counts[i] << '\n';
}

/// Amplitudes, probabilities and phases of the stationary solution.
inline void write_solution_csv(std::ostream& os, const RegionalWavefield& f) {
  os << "quantity,value\n";
  auto row = [&](const char* q, double v) { os << q << ',' << fmt(v) << '\n'; };
  row("k0", f.k().k0);
  row("kappa0", f.k().kappa0);
  if (f.is_barrier()) {
    const auto& b = f.barrier();
    row("a", f.barrier_width());
    row("B_over_A_re", b.B_over_A.real());
    row("B_over_A_im", b.B_over_A.imag());
    row("C_over_A_re", b.C_over_A.real());
    row("C_over_A_im", b.C_over_A.imag());
    row("D_over_A_re", b.D_over_A.real());
    row("D_over_A_im", b.D_over_A.imag());
    row("F_over_A_re", b.F_over_A.real());
    row("F_over_A_im", b.F_over_A.imag());
    row("P_R", b.P_R);
    row("P_T", b.P_T);
    row("phi", b.phi);
    row("theta", b.theta);
  } else {
    const auto& s = f.step();
    row("B_over_A", s.B_over_A);
    row("C_over_A", s.C_over_A);
    row("P_R", s.P_R);
    row("P_T", s.P_T);
    row("phi", f.overlap_phase());
  }
  row("L", f.packet().length);
  row("edge_width", f.packet().edge_width);
  row("T", f.T());
  row("momentum_spread", f.packet().momentum_spread());
}

struct PlotWindow {
  double x_min = 0.0;
  double x_max = 1.0;
  double t_min = 0.0;
  double t_max = 1.0;
};

/// Space-time diagram: position across, time upwards. Packet edges are dashed,
/// trajectories solid, the barrier interior shaded.
inline void write_spacetime_svg(std::ostream& os, const RegionalWavefield& f,
                                std::span<const Trajectory> trajectories, const PlotWindow& win) {
  constexpr double W = 800.0;
  constexpr double H = 600.0;
  constexpr double pad = 50.0;
  auto px = [&](double x) { return pad + (x - win.x_min) / (win.x_max - win.x_min) * (W - 2 * pad); };
  auto py = [&](double t) { return H - pad - (t - win.t_min) / (win.t_max - win.t_min) * (H - 2 * pad); };
  auto line = [&](double x1, double t1, double x2, double t2, const char* style) {
    os << "<line x1=\"" << fmt(px(x1)) << "\" y1=\"" << fmt(py(t1)) << "\" x2=\"" << fmt(px(x2))
       << "\" y2=\"" << fmt(py(t2)) << "\" " << style << "/>\n";
  };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<defs><clipPath id=\"plot\"><rect x=\"" << pad << "\" y=\"" << pad << "\" width=\""
     << W - 2 * pad << "\" height=\"" << H - 2 * pad << "\"/></clipPath></defs>\n";
  os << "<g clip-path=\"url(#plot)\">\n";
  if (f.is_barrier()) {
    const double a = f.barrier_width();
    os << "<rect x=\"" << fmt(px(0.0)) << "\" y=\"" << pad << "\" width=\""
       << fmt(std::max(px(a) - px(0.0), 1.0)) << "\" height=\"" << H - 2 * pad
       << "\" fill=\"#d8d8d8\"/>\n";
  }
  line(0.0, win.t_min, 0.0, win.t_max, "stroke=\"#888\" stroke-width=\"1\"");

  const char* dashed = "stroke=\"#1f4e9c\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"";
  const double v = f.incident_speed();
  const double vt = f.transmitted_speed();
  const double L = f.packet().length;
  const double T = f.T();
  const double base = f.barrier_width();
  const double t0 = win.t_min;
  const double t1 = win.t_max;
  line(v * t0, t0, 0.0, 0.0, dashed);
  line(v * t0 - L, t0, 0.0, T, dashed);
  line(0.0, 0.0, -v * t1, t1, dashed);
  if (t1 > T) line(0.0, T, -v * (t1 - T), t1, dashed);
  line(base, 0.0, base + vt * t1, t1, dashed);
  if (t1 > T) line(base, T, base + vt * (t1 - T), t1, dashed);

  for (const auto& tr : trajectories) {
    if (tr.samples.size() < 2) continue;
    const char* colour = tr.outcome == Outcome::Transmitted ? "#b22222"
                         : tr.outcome == Outcome::Reflected ? "#2e8b57"
                                                            : "#555555";
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1\" points=\"";
    for (const auto& [t, x] : tr.samples) os << fmt(px(x)) << ',' << fmt(py(t)) << ' ';
    os << "\"/>\n";
  }
  os << "</g>\n";
  os << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << W - 2 * pad << "\" height=\""
     << H - 2 * pad << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\" font-size=\"14\">x</text>\n";
  os << "<text x=\"15\" y=\"" << H / 2 << "\" font-size=\"14\">t</text>\n";
  os << "<text x=\"" << pad << "\" y=\"" << H - pad + 18 << "\" font-size=\"11\">" << fmt(win.x_min)
     << "</text>\n";
  os << "<text x=\"" << W - pad << "\" y=\"" << H - pad + 18 << "\" font-size=\"11\" text-anchor=\"end\">"
     << fmt(win.x_max) << "</text>\n";
  os << "<text x=\"" << pad - 5 << "\" y=\"" << H - pad << "\" font-size=\"11\" text-anchor=\"end\">"
     << fmt(win.t_min) << "</text>\n";
  os << "<text x=\"" << pad - 5 << "\" y=\"" << pad + 10 << "\" font-size=\"11\" text-anchor=\"end\">"
     << fmt(win.t_max) << "</text>\n";
  os << "</svg>\n";
}

}  // namespace pilotwave
