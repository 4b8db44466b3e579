#pragma once

// Configuration-driven experiment runner behind the command-line tool.
//
// Config files are flat "key = value" text; '#' starts a comment. Keys:
//   scenario (step|barrier), E, V0, a, L_wavelengths, edge_width_wavelengths,
//   n_trajectories, seed, engine (regional|oracle|both),
//   oracle_points_per_wavelength, oracle_courant, oracle_margin_wavelengths,
//   out, hbar, mass, plot_trajectories, convergence_levels

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pilotwave/compare.hpp"
#include "pilotwave/io.hpp"
#include "pilotwave/oracle.hpp"
#include "pilotwave/regional_wavefield.hpp"
#include "pilotwave/stats.hpp"
#include "pilotwave/trajectories.hpp"

namespace pilotwave {

enum class Engine { Regional, Oracle, Both };

inline Engine parse_engine(std::string_view s) {
  if (s == "regional") return Engine::Regional;
  if (s == "oracle") return Engine::Oracle;
  if (s == "both") return Engine::Both;
  throw ConfigurationError("engine must be regional, oracle or both");
}

inline std::string_view to_string(Engine e) {
  switch (e) {
    case Engine::Regional: return "regional";
    case Engine::Oracle: return "oracle";
    case Engine::Both: return "both";
  }
  return "unknown";
}

struct ExperimentConfig {
  std::string scenario = "step";
  double E = 0.5;
  double V0 = 0.375;
  double a = 1.0;
  double L_wavelengths = 100.0;
  double edge_width_wavelengths = 5.0;
  std::size_t n_trajectories = 10000;
  std::uint64_t seed = 1;
  Engine engine = Engine::Regional;
  double oracle_points_per_wavelength = 50.0;
  double oracle_courant = 0.5;
  double oracle_margin_wavelengths = 40.0;
  std::string out = "out";
  double hbar = 1.0;
  double mass = 1.0;
  std::size_t plot_trajectories = 41;
  std::size_t convergence_levels = 3;

  ScatterScenario make_scenario() const {
    const PhysicalConstants c{hbar, mass};
    c.validate();
    if (scenario == "step") return ScatterScenario::step(V0, E, c);
    if (scenario == "barrier") return ScatterScenario::barrier(V0, a, E, c);
    throw ConfigurationError("scenario must be step or barrier");
  }

  RegionalWavefield make_model() const {
    return RegionalWavefield(make_scenario(), L_wavelengths, edge_width_wavelengths);
  }

  OracleResolution oracle_resolution() const {
    OracleResolution r;
    r.points_per_wavelength = oracle_points_per_wavelength;
    r.courant = oracle_courant;
    r.margin_wavelengths = oracle_margin_wavelengths;
    return r;
  }

  /// Throws ConfigurationError / UnsupportedRegime for inconsistent settings.
  void validate() const {
    (void)make_model();
    if (n_trajectories == 0) throw ConfigurationError("n_trajectories must be positive");
    if (!(oracle_points_per_wavelength >= 20.0))
      throw ConfigurationError("oracle_points_per_wavelength below 20 under-resolves the wavelength");
    if (!(oracle_courant > 0.0)) throw ConfigurationError("oracle_courant must be positive");
    if (!(oracle_margin_wavelengths >= 10.0))
      throw ConfigurationError("oracle_margin_wavelengths must be at least 10");
    if (out.empty()) throw ConfigurationError("out must name a directory");
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view key, std::string_view v) {
  double d = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(d))
    throw ConfigurationError("config: " + std::string(key) + " expects a number, got '" +
                             std::string(v) + "'");
  return d;
}

inline std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t u = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), u);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigurationError("config: " + std::string(key) + " expects a non-negative integer, got '" +
                             std::string(v) + "'");
  return u;
}

}  // namespace detail

inline void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view value) {
  key = detail::trim(key);
  value = detail::trim(value);
  using detail::parse_double;
  using detail::parse_uint;
  if (key == "scenario") c.scenario = std::string(value);
  else if (key == "E") c.E = parse_double(key, value);
  else if (key == "V0") c.V0 = parse_double(key, value);
  else if (key == "a") c.a = parse_double(key, value);
  else if (key == "L_wavelengths") c.L_wavelengths = parse_double(key, value);
  else if (key == "edge_width_wavelengths") c.edge_width_wavelengths = parse_double(key, value);
  else if (key == "n_trajectories") c.n_trajectories = parse_uint(key, value);
  else if (key == "seed") c.seed = parse_uint(key, value);
  else if (key == "engine") c.engine = parse_engine(value);
  else if (key == "oracle_points_per_wavelength") c.oracle_points_per_wavelength = parse_double(key, value);
  else if (key == "oracle_courant") c.oracle_courant = parse_double(key, value);
  else if (key == "oracle_margin_wavelengths") c.oracle_margin_wavelengths = parse_double(key, value);
  else if (key == "out") c.out = std::string(value);
  else if (key == "hbar") c.hbar = parse_double(key, value);
  else if (key == "mass") c.mass = parse_double(key, value);
  else if (key == "plot_trajectories") c.plot_trajectories = parse_uint(key, value);
  else if (key == "convergence_levels") c.convergence_levels = parse_uint(key, value);
  else throw ConfigurationError("config: unknown key '" + std::string(key) + "'");
}

/// "key=value" as given to --set.
inline void apply_assignment(ExperimentConfig& c, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigurationError("expected key=value, got '" + std::string(assignment) + "'");
  apply_setting(c, assignment.substr(0, eq), assignment.substr(eq + 1));
}

inline void apply_config_stream(ExperimentConfig& c, std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty()) continue;
    apply_assignment(c, s);
  }
}

inline void apply_config_file(ExperimentConfig& c, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open config file " + path.string());
  apply_config_stream(c, in);
}

struct ValidityFlag {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = false;
};

struct RunReport {
  std::vector<SummaryRow> summary;
  std::vector<ValidityFlag> flags;
  std::vector<std::string> files;

  bool ok() const {
    return std::all_of(flags.begin(), flags.end(), [](const ValidityFlag& f) { return f.pass; });
  }
  void add(std::string q, double v, double lo = std::nan(""), double hi = std::nan("")) {
    summary.push_back({std::move(q), v, lo, hi});
  }
  /// Passes when value < limit.
  void flag_below(std::string name, double value, double limit) {
    flags.push_back({std::move(name), value, limit, value < limit});
  }
  /// Passes when value >= limit.
  void flag_at_least(std::string name, double value, double limit) {
    flags.push_back({std::move(name), value, limit, value >= limit});
  }
};

namespace detail {

class OutputDir {
 public:
  OutputDir(const std::string& dir, RunReport& report) : dir_(dir), report_(report) {
    std::filesystem::create_directories(dir_);
  }
  std::ofstream open(const std::string& name) {
    const auto p = dir_ / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    report_.files.push_back(p.string());
    return os;
  }

 private:
  std::filesystem::path dir_;
  RunReport& report_;
};

inline std::string time_label(double t, double T) {
  return "t_over_T=" + fmt(t / T);
}

inline void write_flags(OutputDir& out, const RunReport& r) {
  auto os = out.open("validity.csv");
  os << "flag,value,limit,pass\n";
  for (const auto& f : r.flags)
    os << f.name << ',' << fmt(f.value) << ',' << fmt(f.limit) << ',' << (f.pass ? "true" : "false") << '\n';
}

/// Starting points at the probability quantiles (i + 1/2)/m of the packet.
inline std::vector<double> quantile_positions(const PlaneWavePacket& p, std::size_t m) {
  std::vector<double> xs(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
    double lo = p.support_begin();
    double hi = p.support_end();
    for (int it = 0; it < 200 && hi - lo > 1e-12 * p.length; ++it) {
      const double mid = 0.5 * (lo + hi);
      (p.cdf(mid) < u ? lo : hi) = mid;
    }
    xs[i] = 0.5 * (lo + hi);
  }
  return xs;
}

inline PlotWindow spacetime_window(const RegionalWavefield& f, double t_end) {
  const double t0 = f.contact_time();
  const double v = f.incident_speed();
  const double L = f.packet().length;
  PlotWindow w;
  w.t_min = t0;
  w.t_max = t_end;
  w.x_min = 1.05 * std::min(v * t0 - L, -v * t_end);
  w.x_max = f.barrier_width() + 1.05 * f.transmitted_speed() * t_end;
  return w;
}

}  // namespace detail

/// Checkpoints at which ensemble positions are compared with |psi|^2.
inline std::vector<double> checkpoint_times(double T) { return {0.0, 0.25 * T, 0.5 * T, T, 1.5 * T}; }

/// End-to-end scattering run: solution table, trajectory ensembles with
/// outcome statistics and KS tables, the space-time plot, and (oracle
/// engine) the numerical reference with its quality diagnostics.
inline RunReport run_scatter(const ExperimentConfig& cfg) {
  cfg.validate();
  RunReport rep;
  detail::OutputDir out(cfg.out, rep);
  const RegionalWavefield model = cfg.make_model();
  const double T = model.T();
  const double L = model.packet().length;
  const double t_end = T + L / model.incident_speed();
  const auto checkpoints = checkpoint_times(T);

  {
    auto os = out.open("solution.csv");
    write_solution_csv(os, model);
  }
  rep.add("P_T_analytic", model.P_T());
  rep.add("P_R_analytic", model.P_R());

  if (cfg.engine != Engine::Oracle) {
    const RegionalVelocityField vf(model);
    const double t0 = model.contact_time();
    const auto x0 = sample_initial_positions(model.incident_packet_at(t0), cfg.n_trajectories, cfg.seed);
    IntegrationControls ctl = default_controls(model, t_end);
    ctl.stop_times = checkpoints;
    const auto trs = integrate_ensemble(vf, x0, t0, ctl);
    std::vector<Outcome> outcomes(trs.size());
    std::transform(trs.begin(), trs.end(), outcomes.begin(), [](const Trajectory& t) { return t.outcome; });
    EnsembleResult er = empirical_probabilities(outcomes);
    {
      auto hs = out.open("histogram.csv");
      for (std::size_t s = 0; s < checkpoints.size(); ++s) {
        std::vector<double> pos(trs.size());
        for (std::size_t i = 0; i < trs.size(); ++i) pos[i] = trs[i].at_stops[s];
        er.ks_by_time.emplace_back(checkpoints[s], equivariance_ks(pos, model, checkpoints[s]));
        write_histogram_csv(hs, checkpoints[s], make_histogram(pos), s == 0);
      }
    }
    const std::size_t crossings = count_crossings(trs);
    {
      auto os = out.open("ensemble.csv");
      write_ensemble_csv(os, x0, outcomes);
    }
    {
      auto os = out.open("ks.csv");
      write_ks_csv(os, er.ks_by_time, er.n);
    }
    rep.add("P_T_regional_ensemble", er.P_T_hat, er.ci_low, er.ci_high);
    rep.add("n_transmitted", static_cast<double>(er.n_transmitted));
    rep.add("n_reflected", static_cast<double>(er.n_reflected));
    rep.add("n_unresolved", static_cast<double>(er.n_unresolved));
    rep.add("crossing_pairs", static_cast<double>(crossings));
    double ks_max = 0.0;
    for (const auto& [t, d] : er.ks_by_time) {
      rep.add("ks_regional_" + detail::time_label(t, T), d);
      ks_max = std::max(ks_max, d);
    }
    rep.flag_below("regional_unresolved_fraction", er.unresolved_fraction(), kMaxUnresolvedFraction);
    rep.flag_below("regional_crossing_pairs", static_cast<double>(crossings), 0.5);

    IntegrationControls plot_ctl = default_controls(model, t_end);
    plot_ctl.stop_when_classified = false;
    plot_ctl.record_every = 10;
    const auto starts = detail::quantile_positions(model.incident_packet_at(t0), cfg.plot_trajectories);
    const auto shown = integrate_ensemble(vf, starts, t0, plot_ctl);
    {
      auto os = out.open("trajectories.csv");
      write_trajectory_csv(os, shown);
    }
    {
      auto os = out.open("spacetime.svg");
      write_spacetime_svg(os, model, shown, detail::spacetime_window(model, t_end));
    }
  }

  if (cfg.engine != Engine::Regional) {
    OracleSimulation sim(model, t_end, cfg.oracle_resolution());
    const auto x0 = sample_initial_positions(model.incident_packet_at(sim.t_start()), cfg.n_trajectories,
                                             cfg.seed);
    std::vector<std::pair<double, double>> ks;
    std::vector<std::pair<double, DensityDiscrepancy>> rms;
    auto snap = out.open("snapshots.csv");
    snap << kSnapshotCsvHeader << '\n';
    const auto result = integrate_oracle_ensemble(
        sim, x0, checkpoints, t_end, model.barrier_width(),
        RegionalVelocityField::kDensityFloorFactor / L,
        [&](std::size_t, const ComplexField& f, std::span<const double> positions) {
          write_snapshot_csv(snap, f, 10);
          ks.emplace_back(f.time, equivariance_ks(positions, f));
          if (cfg.engine == Engine::Both) {
            try {
              rms.emplace_back(f.time, density_discrepancy(model, f));
            } catch (const std::invalid_argument&) {
              // no flat interior at this instant
            }
          }
        });
    snap.close();
    EnsembleResult er = empirical_probabilities(result.outcomes);
    er.ks_by_time = ks;
    const double dx = sim.grid().dx();
    const double right = probability_in(sim.field(), model.barrier_width() + 0.5 * dx, sim.grid().x_max);
    const double left = probability_in(sim.field(), sim.grid().x_min, -0.5 * dx);
    rep.add("P_T_oracle_probability", right);
    rep.add("P_left_plus_right_oracle", left + right);
    rep.add("P_T_oracle_ensemble", er.P_T_hat, er.ci_low, er.ci_high);
    rep.add("oracle_n_unresolved", static_cast<double>(er.n_unresolved));
    rep.add("oracle_norm_drift", sim.norm_drift());
    rep.add("oracle_boundary_leakage", sim.boundary_leakage());
    rep.flag_below("oracle_unresolved_fraction", er.unresolved_fraction(), kMaxUnresolvedFraction);
    rep.flag_below("oracle_norm_drift", sim.norm_drift(), 1e-8);
    rep.flag_below("oracle_boundary_leakage", sim.boundary_leakage(), 1e-6);
    for (const auto& [t, d] : ks) rep.add("ks_oracle_" + detail::time_label(t, T), d);
    {
      auto os = out.open("oracle_ensemble.csv");
      write_ensemble_csv(os, x0, result.outcomes);
    }
    {
      auto os = out.open("oracle_ks.csv");
      write_ks_csv(os, er.ks_by_time, er.n);
    }
    if (cfg.engine == Engine::Both) {
      auto os = out.open("comparison.csv");
      os << "t,relative_rms,nodes\n";
      for (const auto& [t, d] : rms) {
        os << fmt(t) << ',' << fmt(d.relative_rms) << ',' << d.nodes << '\n';
        rep.add("density_rms_discrepancy_" + detail::time_label(t, T), d.relative_rms);
      }
    }
  }
  detail::write_flags(out, rep);
  {
    auto os = out.open("summary.csv");
    write_summary_csv(os, rep.summary);
  }
  return rep;
}

struct ConvergenceRow {
  std::string label;
  double points_per_wavelength = 0.0;
  double dx = 0.0;
  double dt = 0.0;
  double residual = 0.0;
  /// log2 of the residual ratio to the previous (coarser) row; NaN on the first row.
  double observed_order = std::nan("");
};

/// Continuity residual of one solver step taken at t_probe.
inline double probe_residual(const RegionalWavefield& model, const OracleResolution& res, double t_probe,
                             double* dx = nullptr, double* dt = nullptr) {
  OracleSimulation sim(model, t_probe, res);
  sim.advance_to(t_probe);
  const ComplexField before = sim.field();
  sim.step();
  if (dx) *dx = sim.grid().dx();
  if (dt) *dt = sim.dt();
  return continuity_residual(before, sim.field(), sim.constants());
}

/// Scale-free size of a continuity residual: residual / (max rho / dt * sqrt(extent)),
/// i.e. relative to a single d rho/dt term spread over the domain.
inline double relative_residual(double residual, const ComplexField& f, double dt) {
  const auto rho = density(f);
  const double peak = *std::max_element(rho.begin(), rho.end());
  return residual / (peak / dt * std::sqrt(f.grid.x_max - f.grid.x_min));
}

/// Field-free control: a discrete eigenstate sin(n pi i/(N-1)) of the box
/// formed by the Dirichlet ends. One step changes only its phase, so the
/// continuity residual sits at the roundoff floor.
struct BoxControl {
  double residual = 0.0;
  double relative = 0.0;
  double dx = 0.0;
  double dt = 0.0;
  /// max |rho(after) - rho(before)| / max rho after `steps` steps.
  double density_change = 0.0;
};

inline BoxControl box_eigenstate_control(double k0, double points_per_wavelength, double courant,
                                         const PhysicalConstants& c = {}, std::size_t steps = 1) {
  const double lam = wavelength(k0);
  const double box = 20.0 * lam;
  const auto n_points = static_cast<std::size_t>(std::llround(20.0 * points_per_wavelength)) + 1;
  const Grid1D g = Grid1D::make(0.0, box, n_points);
  const double mode = 40.0;  // wavelength 2 box / mode = lambda
  ComplexField f{g, std::vector<complex>(n_points), 0.0};
  for (std::size_t i = 0; i < n_points; ++i)
    f.values[i] = std::sqrt(2.0 / box) *
                  std::sin(mode * pi * static_cast<double>(i) / static_cast<double>(n_points - 1));
  BoxControl out;
  out.dx = g.dx();
  out.dt = courant * out.dx / group_velocity(k0, c);
  const std::vector<double> V(n_points, 0.0);
  const ComplexField after = evolve(f, V, out.dt, 1, c, k0);
  out.residual = continuity_residual(f, after, c);
  out.relative = relative_residual(out.residual, f, out.dt);
  const ComplexField later = steps > 1 ? evolve(f, V, out.dt, steps, c, k0) : after;
  const auto r0 = density(f);
  const auto r1 = density(later);
  double peak = 0.0;
  for (std::size_t i = 0; i < n_points; ++i) {
    out.density_change = std::max(out.density_change, std::abs(r1[i] - r0[i]));
    peak = std::max(peak, r0[i]);
  }
  out.density_change /= peak;
  return out;
}

/// Joint dx/dt refinement of the oracle on the configured scenario: the
/// continuity residual of one step at t = T/4 (incident, reflected and
/// transmitted waves all present) for points-per-wavelength p, 2p, 4p, ...
inline std::vector<ConvergenceRow> convergence_table(const ExperimentConfig& cfg) {
  if (cfg.convergence_levels < 2)
    throw ConfigurationError("convergence study needs at least two resolutions");
  const RegionalWavefield model = cfg.make_model();
  const double t_probe = 0.25 * model.T();
  std::vector<ConvergenceRow> rows;
  for (std::size_t l = 0; l < cfg.convergence_levels; ++l) {
    OracleResolution res = cfg.oracle_resolution();
    res.points_per_wavelength = cfg.oracle_points_per_wavelength * std::pow(2.0, static_cast<double>(l));
    ConvergenceRow r;
    r.label = "scatter";
    r.points_per_wavelength = res.points_per_wavelength;
    r.residual = probe_residual(model, res, t_probe, &r.dx, &r.dt);
    if (!rows.empty()) r.observed_order = std::log2(rows.back().residual / r.residual);
    rows.push_back(r);
  }
  return rows;
}

inline constexpr double kMinObservedOrder = 1.9;
/// Ceiling for the scale-free residual of the field-free control.
inline constexpr double kControlFloor = 1e-12;

inline RunReport run_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto rows = convergence_table(cfg);
  RunReport rep;
  detail::OutputDir out(cfg.out, rep);
  const RegionalWavefield model = cfg.make_model();
  const BoxControl ctrl = box_eigenstate_control(model.k().k0, cfg.oracle_points_per_wavelength,
                                                 cfg.oracle_courant, model.constants());
  {
    auto os = out.open("convergence.csv");
    os << "case,points_per_wavelength,dx,dt,residual,observed_order\n";
    for (const auto& r : rows)
      os << r.label << ',' << fmt(r.points_per_wavelength) << ',' << fmt(r.dx) << ',' << fmt(r.dt) << ','
         << fmt(r.residual) << ',' << fmt(r.observed_order) << '\n';
    os << "free_box_eigenstate," << fmt(cfg.oracle_points_per_wavelength) << ',' << fmt(ctrl.dx) << ','
       << fmt(ctrl.dt) << ',' << fmt(ctrl.residual) << ",nan\n";
  }
  double min_order = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    rep.add("residual_ppw=" + fmt(r.points_per_wavelength), r.residual);
    if (!std::isnan(r.observed_order)) {
      rep.add("observed_order_ppw=" + fmt(r.points_per_wavelength), r.observed_order);
      min_order = std::min(min_order, r.observed_order);
    }
  }
  rep.add("control_residual", ctrl.residual);
  rep.add("control_relative_residual", ctrl.relative);
  rep.flag_at_least("min_observed_order", min_order, kMinObservedOrder);
  rep.flag_below("control_relative_residual", ctrl.relative, kControlFloor);
  detail::write_flags(out, rep);
  {
    auto os = out.open("summary.csv");
    write_summary_csv(os, rep.summary);
  }
  return rep;
}

/// Critical-trajectory analysis with a plot of trajectories started across the packet.
inline RunReport run_critical(const ExperimentConfig& cfg) {
  cfg.validate();
  RunReport rep;
  detail::OutputDir out(cfg.out, rep);
  const RegionalWavefield model = cfg.make_model();
  const auto c = critical_analysis(model);
  const double L = model.packet().length;
  {
    auto os = out.open("solution.csv");
    write_solution_csv(os, model);
  }
  rep.add("P_T_analytic", model.P_T());
  rep.add("v_bar_O", c.v_bar_O);
  rep.add("v_bar_O_over_v_g", c.v_bar_O / model.incident_speed());
  rep.add("P_T_from_geometry", c.P_T_from_geometry);
  rep.add("tau", c.tau);
  rep.add("critical_offset", c.critical_offset);
  rep.add("critical_offset_over_L", c.critical_offset / L);
  rep.add("bisection_offset", c.bisection_offset);
  rep.add("bisection_offset_over_L", c.bisection_offset / L);
  rep.add("P_T_from_bisection", c.P_T_from_bisection);
  rep.add("trajectories_integrated", static_cast<double>(c.trajectories_integrated));
  rep.flag_below("route_disagreement_over_P_T",
                 std::abs(c.P_T_from_geometry - c.P_T_from_bisection) / c.P_T_from_geometry, 2e-3);

  const double t0 = model.contact_time();
  const double t_end = model.T() + L / model.incident_speed();
  const double lead = model.incident_speed() * t0;
  std::vector<double> starts;
  const std::size_t m = std::max<std::size_t>(cfg.plot_trajectories, 2);
  for (std::size_t i = 0; i < m; ++i)
    starts.push_back(lead - L * (static_cast<double>(i) + 0.5) / static_cast<double>(m));
  starts.push_back(lead - c.bisection_offset + 1e-3 * L);
  starts.push_back(lead - c.bisection_offset - 1e-3 * L);
  IntegrationControls ctl = default_controls(model, t_end);
  ctl.stop_when_classified = false;
  ctl.record_every = 10;
  const auto shown = integrate_ensemble(RegionalVelocityField(model), starts, t0, ctl);
  {
    auto os = out.open("critical_trajectories.csv");
    write_trajectory_csv(os, shown);
  }
  {
    auto os = out.open("critical.svg");
    write_spacetime_svg(os, model, shown, detail::spacetime_window(model, t_end));
  }
  detail::write_flags(out, rep);
  {
    auto os = out.open("summary.csv");
    write_summary_csv(os, rep.summary);
  }
  return rep;
}

}  // namespace pilotwave
