#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "pilotwave/stats.hpp"
#include "pilotwave/trajectories.hpp"

using namespace pilotwave;

namespace {

ScatterScenario step_scenario() { return ScatterScenario::step(0.375, 0.5); }
ScatterScenario barrier_scenario() { return ScatterScenario::barrier(0.5, std::sqrt(2.0), 0.25); }

/// Uniform motion everywhere; outcome is decided by the sign of x after t = 1.
struct FreeField {
  double v = 0.7;
  VelocitySample operator()(double, double) const { return {v, RegionLabel::IncidentOnly, true}; }
  std::optional<Outcome> outcome(double x, double t) const {
    if (t <= 1.0) return std::nullopt;
    return x > 0.0 ? Outcome::Transmitted : Outcome::Reflected;
  }
};

}  // namespace

TEST(VelocityRegional, SingleWindowSpeeds) {
  const RegionalWavefield f(step_scenario(), 100, 5);
  const double L = f.packet().length;
  EXPECT_DOUBLE_EQ(velocity_regional(f, -5 * L / 8, f.T() / 4), 1.0);
  EXPECT_DOUBLE_EQ(velocity_regional(f, L / 8, f.T() / 2), 0.5);
  EXPECT_DOUBLE_EQ(velocity_regional(f, -L / 2, 1.5 * f.T()), -1.0);
  EXPECT_THROW(velocity_regional(f, -3 * L, f.T() / 2), std::domain_error);
}

TEST(VelocityRegional, OverlapExtremes) {
  const RegionalWavefield f(step_scenario(), 100, 5);
  // B/A = 1/3: the fastest point moves at 2 v_g, the slowest at v_g / 2
  const double x_fast = -pi / 2 - 20 * pi;
  const double x_slow = -20 * pi;
  EXPECT_NEAR(velocity_regional(f, x_fast, f.T() / 4), 2.0, 1e-12);
  EXPECT_NEAR(velocity_regional(f, x_slow, f.T() / 4), 0.5, 1e-12);
}

TEST(VelocityRegional, ScalesWithPhysicalConstants) {
  const auto sc = ScatterScenario::step(0.375, 0.5, {1.0, 0.25});
  const RegionalWavefield f(sc, 100, 5);
  const double vg = f.incident_speed();
  EXPECT_DOUBLE_EQ(vg, 2.0);
  EXPECT_DOUBLE_EQ(velocity_regional(f, f.packet().length / 8, f.T() / 2), 0.5 * vg);
}

TEST(VelocityRegional, BarrierInteriorUsesStationaryVelocity) {
  const RegionalWavefield f(barrier_scenario(), 100, 5);
  const double a = f.barrier_width();
  for (double x : {0.0, 0.3 * a, 0.7 * a, a}) {
    const CfrFields c = cfr_fields(f.barrier(), f.k(), a, x);
    EXPECT_NEAR(velocity_regional(f, x, f.T() / 2), c.velocity, 1e-14);
  }
  const CfrFields c0 = cfr_fields(f.barrier(), f.k(), a, 0.0);
  EXPECT_NEAR(velocity_regional(f, 0.0, f.T() / 2) * c0.density, c0.current, 1e-12);
}

TEST(VelocityRegional, OverlapMatchesInterferenceFormula) {
  const RegionalWavefield f(step_scenario(), 100, 5);
  const double L = f.packet().length;
  const double B = 1.0 / 3.0;
  for (double x = -L / 5; x < -L / 20; x += 0.41) {
    const double expect = (1 - B * B) / (1 + B * B + 2 * B * std::cos(2 * x));
    ASSERT_NEAR(velocity_regional(f, x, f.T() / 4), expect, 1e-12);
  }
}

TEST(DriftVelocity, Examples) {
  EXPECT_DOUBLE_EQ(drift_velocity_overlap(1.0, 0.0, 1.0), 1.0);
  EXPECT_NEAR(drift_velocity_overlap(1.0, 1.0 / 3.0, 1.0), 0.8, 1e-15);
  EXPECT_NEAR(drift_velocity_overlap(3.0, 1.0, 2.0, {1.0, 2.0}), 0.8, 1e-15);
  EXPECT_THROW(drift_velocity_overlap(1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(drift_velocity_overlap(0.5, 1.0, 1.0), std::invalid_argument);
}

TEST(DriftVelocity, EqualsSpatialMeanOfOverlapVelocity) {
  gen::Draw d(11);
  for (int i = 0; i < 50; ++i) {
    const double k = d.log_uniform(0.1, 10.0);
    const double A = 1.0;
    const double B = d.uniform(0.0, 0.95);
    // mean of v over a period, weighted by rho, equals the drift velocity
    const int n = 20000;
    const double period = pi / k;
    double num = 0.0;
    double den = 0.0;
    for (int s = 0; s < n; ++s) {
      const double x = period * (s + 0.5) / n;
      const double rho = A * A + B * B + 2 * A * B * std::cos(2 * k * x);
      const double j = k * (A * A - B * B);
      num += j;
      den += rho;
    }
    ASSERT_NEAR(num / den, drift_velocity_overlap(A, B, k), 1e-12 * k);
  }
}

TEST(SampleInitialPositions, DeterministicAndInSupport) {
  const auto p = PlaneWavePacket::in_wavelengths(1.0, 100, 5, -3.0);
  const auto a = sample_initial_positions(p, 1000, 42);
  const auto b = sample_initial_positions(p, 1000, 42);
  const auto c = sample_initial_positions(p, 1000, 43);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (double x : a) {
    ASSERT_GT(x, p.support_begin());
    ASSERT_LT(x, p.support_end());
  }
  EXPECT_THROW(sample_initial_positions(p, 0, 1), std::invalid_argument);
}

TEST(SampleInitialPositions, FollowsPacketDensity) {
  const auto p = PlaneWavePacket::in_wavelengths(1.0, 100, 5, 0.0);
  const auto xs = sample_initial_positions(p, 10000, 7);
  EXPECT_LT(ks_statistic(xs, [&](double x) { return p.cdf(x); }), 0.02);
}

TEST(Integrate, FreeFieldIsExact) {
  IntegrationControls ctl;
  ctl.step = 0.1;
  ctl.t_end = 3.0;
  ctl.stop_when_classified = false;
  ctl.record_every = 1;
  ctl.stop_times = {0.25, 2.0};
  const FreeField field;
  const Trajectory tr = integrate(field, -1.0, 0.0, ctl);
  ASSERT_EQ(tr.at_stops.size(), 2u);
  EXPECT_NEAR(tr.at_stops[0], -1.0 + 0.7 * 0.25, 1e-12);
  EXPECT_NEAR(tr.at_stops[1], -1.0 + 0.7 * 2.0, 1e-12);
  for (const auto& [t, x] : tr.samples) ASSERT_NEAR(x, -1.0 + 0.7 * t, 1e-12);
  EXPECT_NEAR(tr.samples.back().first, 3.0, 1e-12);
  EXPECT_EQ(tr.outcome, Outcome::Reflected);
  EXPECT_GT(tr.classified_at, 1.0);
  EXPECT_LT(tr.classified_at, 1.0 + ctl.step + 1e-12);
}

TEST(Integrate, StopsOnceClassified) {
  IntegrationControls ctl;
  ctl.step = 0.1;
  ctl.t_end = 100.0;
  const Trajectory tr = integrate(FreeField{}, -5.0, 0.0, ctl);
  EXPECT_EQ(tr.outcome, Outcome::Reflected);
  EXPECT_LT(tr.classified_at, 1.2);
  IntegrationControls bad;
  EXPECT_THROW(integrate(FreeField{}, 0.0, 0.0, bad), std::invalid_argument);
}

TEST(Integrate, EdgeStartsTransmitAndReflect) {
  for (const auto& sc : {step_scenario(), barrier_scenario()}) {
    const RegionalWavefield f(sc, 100, 5);
    const RegionalVelocityField vf(f);
    const auto ctl = default_controls(f, f.T() + f.packet().length / f.incident_speed());
    const double t0 = f.contact_time();
    const double lead = f.incident_speed() * t0;
    EXPECT_EQ(integrate(vf, lead, t0, ctl).outcome, Outcome::Transmitted);
    EXPECT_EQ(integrate(vf, lead - f.packet().length, t0, ctl).outcome, Outcome::Reflected);
  }
}

TEST(Integrate, UnresolvedStartStaysUnresolved) {
  const RegionalWavefield f(step_scenario(), 100, 5);
  const RegionalVelocityField vf(f);
  const auto ctl = default_controls(f, 2 * f.T());
  const Trajectory tr = integrate(vf, -10 * f.packet().length, 0.0, ctl);
  EXPECT_EQ(tr.outcome, Outcome::Unresolved);
}

TEST(CriticalAnalysis, StepGeometryIsExact) {
  const RegionalWavefield f(step_scenario(), 100, 5);
  const auto rep = critical_analysis(f);
  EXPECT_NEAR(rep.v_bar_O, 0.8, 1e-14);
  EXPECT_NEAR(rep.P_T_from_geometry, 8.0 / 9.0, 1e-14);
  EXPECT_NEAR(rep.P_T_from_geometry, f.P_T(), 1e-14);
  EXPECT_NEAR(rep.critical_offset, 8.0 / 9.0 * f.packet().length, 1e-9);
  EXPECT_NEAR(rep.bisection_offset, rep.critical_offset, 1e-3 * f.packet().length);
  EXPECT_NEAR(rep.P_T_from_bisection, f.P_T(), 1e-3);
}

TEST(CriticalAnalysis, BarrierRoutesAgree) {
  const RegionalWavefield f(barrier_scenario(), 100, 5);
  const auto rep = critical_analysis(f);
  EXPECT_NEAR(rep.P_T_from_geometry, f.P_T(), 1e-12);
  EXPECT_NEAR(rep.bisection_offset, rep.critical_offset, 1e-3 * f.packet().length);
}

TEST(Ensemble, ThresholdIsMonotoneAndOrderPreserved) {
  const RegionalWavefield f(step_scenario(), 100, 5);
  const RegionalVelocityField vf(f);
  auto ctl = default_controls(f, 1.5 * f.T());
  ctl.stop_times = {0.0, f.T() / 4, f.T() / 2, f.T(), 1.5 * f.T()};
  const auto x0 = sample_initial_positions(f.incident_packet_at(f.contact_time()), 300, 5);
  const auto trs = integrate_ensemble(vf, std::span<const double>(x0), f.contact_time(), ctl);
  EXPECT_EQ(count_crossings(trs), 0u);
  double lowest_transmitted = INFINITY;
  double highest_reflected = -INFINITY;
  for (const auto& tr : trs) {
    ASSERT_NE(tr.outcome, Outcome::Unresolved);
    if (tr.outcome == Outcome::Transmitted) lowest_transmitted = std::min(lowest_transmitted, tr.x0);
    else highest_reflected = std::max(highest_reflected, tr.x0);
  }
  EXPECT_LT(highest_reflected, lowest_transmitted);
}

TEST(Ensemble, ParallelMatchesSerial) {
  const RegionalWavefield f(barrier_scenario(), 100, 5);
  const RegionalVelocityField vf(f);
  auto ctl = default_controls(f, 1.5 * f.T());
  ctl.stop_times = {f.T() / 2, f.T()};
  const auto x0 = sample_initial_positions(f.incident_packet_at(f.contact_time()), 40, 9);
  const auto serial = integrate_ensemble(vf, std::span<const double>(x0), f.contact_time(), ctl, 1);
  const auto threaded = integrate_ensemble(vf, std::span<const double>(x0), f.contact_time(), ctl, 4);
  for (std::size_t i = 0; i < x0.size(); ++i) {
    EXPECT_EQ(serial[i].outcome, threaded[i].outcome);
    EXPECT_EQ(serial[i].at_stops, threaded[i].at_stops);
  }
}

TEST(CountCrossings, DetectsSwaps) {
  std::vector<Trajectory> trs(3);
  trs[0].x0 = 0.0;
  trs[0].at_stops = {0.0, 1.0};
  trs[1].x0 = 1.0;
  trs[1].at_stops = {1.0, 0.5};
  trs[2].x0 = 2.0;
  trs[2].at_stops = {2.0, NAN};
  EXPECT_EQ(count_crossings(trs), 1u);
  trs[1].at_stops[1] = 1.5;
  EXPECT_EQ(count_crossings(trs), 0u);
}

TEST(OracleEnsemble, SmallStepRunClassifiesEveryParticle) {
  const RegionalWavefield f(step_scenario(), 50, 2.5);
  const double lam = f.packet().wavelength();
  const double t_end = f.T() + (f.packet().edge_width + 10 * lam) / f.incident_speed();
  OracleResolution res;
  res.points_per_wavelength = 30;
  OracleSimulation sim(f, t_end, res);
  const double t0 = sim.time();
  const auto x0 = sample_initial_positions(f.incident_packet_at(t0), 200, 3);
  std::size_t calls = 0;
  const auto out = integrate_oracle_ensemble(
      sim, std::span<const double>(x0), {t0, f.T() / 2}, t_end, 0.0, 1e-10,
      [&](std::size_t, const ComplexField&, std::span<const double> p) {
        ++calls;
        EXPECT_EQ(p.size(), x0.size());
      });
  EXPECT_EQ(calls, 2u);
  ASSERT_EQ(out.stop_times.size(), 2u);
  EXPECT_GE(out.stop_times[1], f.T() / 2);
  EXPECT_LT(out.stop_times[1], f.T() / 2 + 2 * sim.dt() + 1e-12);
  const auto est = empirical_probabilities(out.outcomes);
  EXPECT_EQ(est.n_unresolved, 0u);
  const double sigma = std::sqrt(f.P_T() * (1 - f.P_T()) / 200.0);
  EXPECT_NEAR(est.P_T_hat, f.P_T(), 4 * sigma);
  double lowest_transmitted = INFINITY;
  double highest_reflected = -INFINITY;
  for (std::size_t i = 0; i < x0.size(); ++i) {
    if (out.outcomes[i] == Outcome::Transmitted) lowest_transmitted = std::min(lowest_transmitted, x0[i]);
    else highest_reflected = std::max(highest_reflected, x0[i]);
  }
  EXPECT_LT(highest_reflected, lowest_transmitted);
}
