#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pilotwave/compare.hpp"
#include "pilotwave/oracle.hpp"

using namespace pilotwave;

namespace {

ComplexField plane_wave(const Grid1D& g, double k) {
  ComplexField f{g, std::vector<complex>(g.n_points), 0.0};
  for (std::size_t i = 0; i < g.n_points; ++i) f.values[i] = std::exp(complex(0.0, k * g.x(i)));
  return f;
}

ComplexField box_eigenstate(double length, std::size_t cells, int mode) {
  const Grid1D g = Grid1D::make(0.0, length, cells + 1);
  ComplexField f{g, std::vector<complex>(g.n_points), 0.0};
  for (std::size_t i = 0; i < g.n_points; ++i)
    f.values[i] = std::sin(mode * pi * g.x(i) / length);
  const double norm = std::sqrt(total_probability(f));
  for (auto& z : f.values) z /= norm;
  return f;
}

}  // namespace

TEST(Grid1D, AlignedPutsOriginOnNode) {
  const Grid1D g = Grid1D::aligned(-10.3, 7.1, 0.1);
  EXPECT_NEAR(g.dx(), 0.1, 1e-12);
  EXPECT_LE(g.x_min, -10.3);
  EXPECT_GE(g.x_max, 7.1);
  const double u = -g.x_min / g.dx();
  EXPECT_NEAR(u, std::round(u), 1e-9);
  EXPECT_THROW(Grid1D::make(0.0, 1.0, 1), ConfigurationError);
  EXPECT_THROW(Grid1D::make(1.0, 1.0, 5), ConfigurationError);
  EXPECT_THROW(Grid1D::aligned(0.0, 1.0, 0.0), ConfigurationError);
}

TEST(Current, PlaneWaveHasDiscreteFlux) {
  const Grid1D g = Grid1D::make(-5.0, 5.0, 1001);
  const double k = 1.7;
  const auto j = current(plane_wave(g, k));
  const double expect = std::sin(k * g.dx()) / g.dx();
  for (std::size_t i = 1; i + 1 < g.n_points; ++i) ASSERT_NEAR(j[i], expect, 1e-12);
  EXPECT_EQ(j.front(), 0.0);
  EXPECT_EQ(j.back(), 0.0);
}

TEST(Current, RealWavefunctionCarriesNoCurrent) {
  const Grid1D g = Grid1D::make(-5.0, 5.0, 501);
  ComplexField f{g, std::vector<complex>(g.n_points), 0.0};
  for (std::size_t i = 0; i < g.n_points; ++i) f.values[i] = std::cos(2.0 * g.x(i)) * std::exp(-g.x(i) * g.x(i));
  for (double j : current(f)) ASSERT_EQ(j, 0.0);
}

TEST(Current, StepStationaryStateHasUniformFlux) {
  const Wavenumbers k = wavenumbers(ScatterScenario::step(0.375, 0.5));
  const StepSolution s = step_solution(k);
  const Grid1D g = Grid1D::aligned(-20.0, 20.0, 1e-3);
  ComplexField f{g, std::vector<complex>(g.n_points), 0.0};
  for (std::size_t i = 0; i < g.n_points; ++i) {
    const auto [psi, dpsi] = step_stationary_psi(s, k, g.x(i));
    f.values[i] = psi;
  }
  const auto j = current(f);
  const double flux = k.k0 * (1.0 - s.P_R);
  for (std::size_t i = 1; i + 1 < g.n_points; ++i) ASSERT_NEAR(j[i], flux, 1e-5) << g.x(i);
}

TEST(ProbabilityIn, SumsNodesInsideInterval) {
  const Grid1D g = Grid1D::make(0.0, 10.0, 11);
  ComplexField f{g, std::vector<complex>(g.n_points, complex(1.0, 0.0)), 0.0};
  EXPECT_DOUBLE_EQ(total_probability(f), 11.0);
  EXPECT_DOUBLE_EQ(probability_in(f, 0.0, 10.0), 11.0);
  EXPECT_DOUBLE_EQ(probability_in(f, 2.5, 4.5), 2.0);
  EXPECT_EQ(probability_in(f, 5.0, 4.0), 0.0);
  EXPECT_THROW(probability_in(f, -3.0, 4.0), std::out_of_range);
  EXPECT_THROW(probability_in(f, 0.0, 12.0), std::out_of_range);
}

TEST(CrankNicolson, RejectsUnderResolvedGrid) {
  const Grid1D g = Grid1D::make(0.0, 100.0, 101);
  EXPECT_THROW(check_resolution(g, 1.0), ConfigurationError);
  EXPECT_NO_THROW(check_resolution(Grid1D::make(0.0, 100.0, 400), 1.0));
  const ComplexField f = plane_wave(g, 1.0);
  const std::vector<double> V(g.n_points, 0.0);
  EXPECT_THROW(evolve(f, V, 0.1, 1, {}, 1.0), ConfigurationError);
}

TEST(CrankNicolson, RejectsMismatchedInputs) {
  const Grid1D g = Grid1D::make(0.0, 10.0, 101);
  EXPECT_THROW(CrankNicolson(g, std::vector<double>(50, 0.0), 0.1), ConfigurationError);
  EXPECT_THROW(CrankNicolson(g, std::vector<double>(101, 0.0), 0.0), ConfigurationError);
  const CrankNicolson cn(g, std::vector<double>(101, 0.0), 0.1);
  ComplexField other = plane_wave(Grid1D::make(0.0, 10.0, 102), 1.0);
  EXPECT_THROW(cn.step(other), std::invalid_argument);
  ComplexField a = plane_wave(g, 1.0);
  ComplexField b = plane_wave(Grid1D::make(0.0, 10.0, 102), 1.0);
  b.time = 1.0;
  EXPECT_THROW(continuity_residual(a, b), std::invalid_argument);
  ComplexField c = a;
  EXPECT_THROW(continuity_residual(a, c), std::invalid_argument);
}

TEST(CrankNicolson, BoxEigenstateIsStationary) {
  const ComplexField f0 = box_eigenstate(10.0, 2000, 3);
  const std::vector<double> V(f0.grid.n_points, 0.0);
  const ComplexField f1 = evolve(f0, V, 1e-3, 2000, {}, 3 * pi / 10.0);
  double max_diff = 0.0;
  for (std::size_t i = 0; i < f0.values.size(); ++i)
    max_diff = std::max(max_diff, std::abs(std::norm(f1.values[i]) - std::norm(f0.values[i])));
  EXPECT_LT(max_diff, 1e-6);
  EXPECT_NEAR(total_probability(f1), 1.0, 1e-12);
  EXPECT_NEAR(f1.time, 2.0, 1e-12);
}

TEST(CrankNicolson, UnitaryOverManySteps) {
  const Grid1D g = Grid1D::make(-40.0, 40.0, 4001);
  ComplexField f{g, std::vector<complex>(g.n_points), 0.0};
  for (std::size_t i = 0; i < g.n_points; ++i) {
    const double x = g.x(i);
    f.values[i] = std::exp(-x * x / 8.0) * std::exp(complex(0.0, 2.0 * x));
  }
  std::vector<double> V(g.n_points, 0.0);
  for (std::size_t i = 0; i < g.n_points; ++i) V[i] = g.x(i) > 5.0 ? 1.5 : 0.0;
  const double n0 = total_probability(f);
  const ComplexField f1 = evolve(f, V, 0.01, 500, {}, 2.0);
  EXPECT_NEAR(total_probability(f1), n0, 1e-10 * n0);
}

TEST(SamplePotential, MidpointAtJumpNodes) {
  const auto sc = ScatterScenario::barrier(0.5, 1.0, 0.25);
  const Grid1D g = Grid1D::make(-1.0, 2.0, 31);
  const auto V = sample_potential(g, sc);
  EXPECT_EQ(V[0], 0.0);
  EXPECT_EQ(V[10], 0.25);
  EXPECT_EQ(V[15], 0.5);
  EXPECT_EQ(V[20], 0.25);
  EXPECT_EQ(V[25], 0.0);
  const auto Vs = sample_potential(g, ScatterScenario::step(0.375, 0.5));
  EXPECT_EQ(Vs[9], 0.0);
  EXPECT_EQ(Vs[10], 0.1875);
  EXPECT_EQ(Vs[11], 0.375);
}

TEST(ContinuityResidual, SmallForResolvedEvolution) {
  const Grid1D g = Grid1D::make(-40.0, 40.0, 8001);
  ComplexField f{g, std::vector<complex>(g.n_points), 0.0};
  for (std::size_t i = 0; i < g.n_points; ++i) {
    const double x = g.x(i);
    f.values[i] = std::exp(-x * x / 8.0) * std::exp(complex(0.0, 1.0 * x));
  }
  const std::vector<double> V(g.n_points, 0.0);
  const ComplexField f1 = evolve(f, V, 0.005, 1, {}, 1.0);
  const double rho_max = 1.0;
  EXPECT_LT(continuity_residual(f, f1), 1e-3 * rho_max);
}

TEST(ContinuityResidual, SecondOrderForSmoothPacket) {
  double previous = 0.0;
  for (double ppw : {25.0, 50.0, 100.0}) {
    const double dx = 2.0 * pi / ppw;
    const Grid1D g = Grid1D::aligned(-150.0, 150.0, dx);
    ComplexField f{g, std::vector<complex>(g.n_points), 0.0};
    for (std::size_t i = 0; i < g.n_points; ++i) {
      const double x = g.x(i);
      f.values[i] = std::exp(-x * x / 400.0) * std::exp(complex(0.0, x));
    }
    const std::vector<double> V(g.n_points, 0.0);
    const double dt = 0.5 * dx;
    const ComplexField a = evolve(f, V, dt, static_cast<std::size_t>(std::llround(20.0 / dt)), {}, 1.0);
    const ComplexField b = evolve(a, V, dt, 1, {}, 1.0);
    const double r = continuity_residual(a, b);
    if (previous > 0.0) EXPECT_GT(std::log2(previous / r), 1.9) << ppw;
    previous = r;
  }
}

TEST(ContinuityResidual, FreePacketAtDefaultResolution) {
  // calibrated: 3.4e-7 at T/4 for L = 100 wavelengths, w = 5 wavelengths, 50 points per wavelength
  const RegionalWavefield model(ScatterScenario::step(0.375, 0.5), 100, 5);
  const double t = 0.25 * model.T();
  OracleSimulation sim(model, t, {}, true);
  sim.advance_to(t);
  const ComplexField before = sim.field();
  sim.step();
  EXPECT_LT(continuity_residual(before, sim.field()), 1e-6);
}

TEST(OracleSimulation, FreePacketMovesAtGroupVelocity) {
  const RegionalWavefield model(ScatterScenario::step(0.375, 0.5), 50, 2.5);
  const double L = model.packet().length;
  const double t_end = 0.5 * model.T();
  OracleResolution res;
  res.points_per_wavelength = 25;
  res.margin_wavelengths = 10;
  OracleSimulation sim(model, t_end, res, true);
  auto mean_x = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < sim.grid().n_points; ++i)
      s += sim.grid().x(i) * std::norm(sim.field().values[i]);
    return s * sim.grid().dx();
  };
  const double x_start = mean_x();
  const double t_start = sim.time();
  sim.advance_to(t_end);
  EXPECT_NEAR(sim.time(), t_end, 1e-12);
  // group velocity of the discrete Laplacian, slowed by the Cayley form of the time step
  const double k = model.k().k0;
  const double dx = sim.grid().dx();
  const double omega = (1.0 - std::cos(k * dx)) / (dx * dx);
  const double half_phase = 0.5 * omega * sim.dt();
  const double v_discrete = std::sin(k * dx) / dx / (1.0 + half_phase * half_phase);
  const double displacement = mean_x() - x_start;
  EXPECT_NEAR(displacement, v_discrete * (t_end - t_start), 1e-4 * L);
  EXPECT_NEAR(displacement, model.incident_speed() * (t_end - t_start), 0.02 * L);
  EXPECT_LT(sim.norm_drift(), 1e-8);
}

TEST(OracleSimulation, StartsAheadOfContactAndNormalized) {
  const RegionalWavefield model(ScatterScenario::barrier(0.5, std::sqrt(2.0), 0.25), 50, 2.5);
  OracleResolution res;
  res.points_per_wavelength = 25;
  OracleSimulation sim(model, model.T(), res);
  EXPECT_LT(sim.t_start(), model.contact_time());
  EXPECT_NEAR(total_probability(sim.field()), 1.0, 1e-12);
  EXPECT_EQ(probability_in(sim.field(), 0.0, sim.grid().x_max), 0.0);
  const double a = model.barrier_width();
  const double u = (a - sim.grid().x_min) / sim.grid().dx();
  EXPECT_NEAR(u, std::round(u), 1e-6);
  EXPECT_EQ(sim.potential()[static_cast<std::size_t>(std::round(u))], 0.25);
  EXPECT_THROW(OracleSimulation(model, sim.t_start() - 1.0, res), ConfigurationError);
  res.points_per_wavelength = 10;
  EXPECT_THROW(OracleSimulation(model, model.T(), res), ConfigurationError);
}

TEST(OracleSimulation, StepRunConservesAndSplits) {
  const RegionalWavefield model(ScatterScenario::step(0.375, 0.5), 50, 2.5);
  const double lam = model.packet().wavelength();
  const double t_end = model.T() + (model.packet().edge_width + 10 * lam) / model.incident_speed();
  OracleResolution res;
  res.points_per_wavelength = 30;
  OracleSimulation sim(model, t_end, res);
  sim.advance_to(t_end);
  EXPECT_LT(sim.norm_drift(), 1e-8);
  EXPECT_LT(sim.boundary_leakage(), 1e-6);
  const double dx = sim.grid().dx();
  const double P_R = probability_in(sim.field(), sim.grid().x_min, -0.5 * dx);
  const double P_T = probability_in(sim.field(), 0.5 * dx, sim.grid().x_max);
  // the slowest spectral components still linger at the step itself
  EXPECT_NEAR(P_R + P_T, 1.0, 1e-4);
  EXPECT_NEAR(P_T, model.P_T(), 0.01 * model.P_T());
}

TEST(SnapshotCsv, RowsMatchHeader) {
  const Grid1D g = Grid1D::make(0.0, 1.0, 5);
  ComplexField f{g, {complex(1, 2), complex(3, 4), complex(5, 6), complex(7, 8), complex(9, 10)}, 0.5};
  std::ostringstream os;
  write_snapshot_csv(os, f, 2);
  EXPECT_EQ(std::string(kSnapshotCsvHeader), "t,x,re_psi,im_psi");
  EXPECT_EQ(os.str(), "0.5,0,1,2\n0.5,0.5,5,6\n0.5,1,9,10\n");
}

TEST(RegionalAgreement, FlatInteriorDensityWithinTwoPercent) {
  for (const auto& sc : {ScatterScenario::step(0.375, 0.5), ScatterScenario::barrier(0.5, std::sqrt(2.0), 0.25)}) {
    const RegionalWavefield model(sc, 100, 5);
    const double T = model.T();
    OracleSimulation sim(model, 1.5 * T);
    for (double t : {0.25 * T, 0.5 * T, T, 1.5 * T}) {
      sim.advance_to(t);
      const auto d = density_discrepancy(model, sim.field());
      EXPECT_LT(d.relative_rms, 0.02) << "t/T=" << t / T;
      EXPECT_GT(d.nodes, 200u);
    }
  }
}

TEST(RegionalAgreement, NoInteriorNodesIsAnError) {
  const RegionalWavefield model(ScatterScenario::step(0.375, 0.5), 100, 5);
  OracleResolution res;
  res.points_per_wavelength = 20;
  OracleSimulation sim(model, 0.0, res);
  EXPECT_THROW(density_discrepancy(model, sim.field(), 1e9), std::invalid_argument);
}
