#include <gtest/gtest.h>

#include <sstream>

#include "critcf/analysis.hpp"
#include "critcf/error.hpp"
#include "critcf/integrator.hpp"

using namespace critcf;

namespace {

SimulationConfig config(std::size_t n, double t_end) {
  SimulationConfig cfg;
  cfg.truncation_n = n;
  cfg.t_end = t_end;
  return cfg;
}

}  // namespace

TEST(Integrate, ZeroStaysZero) {
  const auto traj = integrate(SizeDistribution(32), config(32, 2.0));
  ASSERT_FALSE(traj.empty());
  EXPECT_EQ(traj.times.back(), 2.0);
  for (const auto& snap : traj.snapshots) {
    for (double v : snap.densities()) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(snap.gel_mass(), 0.0);
  }
}

TEST(Integrate, MonomersFollowCountLaw) {
  const double m = 0.3;
  const auto traj = integrate(build_initial(InitialDataSpec::monodisperse(1, m), 128), config(128, 5.0));
  EXPECT_EQ(traj.times.front(), 0.0);
  EXPECT_EQ(traj.times.back(), 5.0);
  for (std::size_t i = 1; i < traj.size(); ++i) EXPECT_GT(traj.times[i], traj.times[i - 1]);
  const double bound = (1e-13 + 1e-10 * m) * 5.0 * 10.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times[i];
    EXPECT_NEAR(traj.moments[i].m0, m0_closed_form(m, m, t), 1e-6) << t;
    EXPECT_NEAR(traj.moments[i].m1 + traj.snapshots[i].gel_mass(), m, bound) << t;
    EXPECT_LT(traj.snapshots[i].gel_mass(), 1e-10);
    if (i > 0) EXPECT_GE(traj.snapshots[i].gel_mass(), traj.snapshots[i - 1].gel_mass());
  }
  EXPECT_LT(traj.projected_mass, 100.0 * 1e-13);
  EXPECT_FALSE(detect_gelation(traj, 0.01).has_value());
}

TEST(Integrate, TruncationRobustness) {
  const auto rho_small = build_initial(InitialDataSpec::monodisperse(1, 0.3), 256);
  const auto rho_large = build_initial(InitialDataSpec::monodisperse(1, 0.3), 512);
  const auto a = integrate(rho_small, config(256, 5.0));
  const auto b = integrate(rho_large, config(512, 5.0));
  for (std::size_t l = 1; l <= 20; ++l) {
    EXPECT_NEAR(a.snapshots.back().at(l), b.snapshots.back().at(l), 1e-8) << l;
  }
}

TEST(Integrate, SupercriticalMassGels) {
  const auto traj = integrate(build_initial(InitialDataSpec::monodisperse(1, 2.0), 256), config(256, 3.0));
  const auto onset = detect_gelation(traj, 0.01);
  ASSERT_TRUE(onset.has_value());
  EXPECT_LE(*onset, 3.0);
  EXPECT_LT(traj.moments.back().m1, 2.0 * 0.99);
  EXPECT_NEAR(traj.moments.back().m1 + traj.snapshots.back().gel_mass(), 2.0, 1e-6);
}

TEST(Integrate, OutputStrideThinsSnapshots) {
  auto cfg = config(64, 2.0);
  const auto rho = build_initial(InitialDataSpec::monodisperse(1, 0.3), 64);
  const auto every = integrate(rho, cfg);
  cfg.output_stride = 5;
  const auto thinned = integrate(rho, cfg);
  EXPECT_LT(thinned.size(), every.size());
  EXPECT_EQ(thinned.times.back(), 2.0);
  EXPECT_EQ(thinned.snapshots.back(), every.snapshots.back());
}

TEST(Integrate, Rejections) {
  EXPECT_THROW(integrate(SizeDistribution(32), config(64, 1.0)), ValidationError);
  EXPECT_THROW(integrate(SizeDistribution(32), config(32, -1.0)), ValidationError);
}

TEST(Integrate, ImpossibleToleranceUnderflows) {
  auto cfg = config(16, 1.0);
  cfg.abs_tol = 1e-300;
  cfg.rel_tol = 1e-300;
  EXPECT_THROW(integrate(build_initial(InitialDataSpec::monodisperse(1, 0.3), 16), cfg), StepSizeUnderflow);
}

TEST(Integrate, Deterministic) {
  const auto rho = build_initial(InitialDataSpec::geometric(0.5, 0.3), 200);
  auto cfg = config(200, 1.0);
  cfg.convolution_mode = ConvolutionMode::fft;
  const auto a = integrate(rho, cfg);
  const auto b = integrate(rho, cfg);
  EXPECT_EQ(a.times, b.times);
  EXPECT_EQ(a.snapshots.back(), b.snapshots.back());
}

TEST(DetectGelation, EdgeCases) {
  EXPECT_FALSE(detect_gelation(Trajectory{}, 0.01).has_value());
  EXPECT_THROW(detect_gelation(Trajectory{}, 0.0), ValidationError);
  EXPECT_THROW(detect_gelation(Trajectory{}, 1.0), ValidationError);
}

TEST(TrajectoryCsv, Columns) {
  const auto traj = integrate(build_initial(InitialDataSpec::monodisperse(1, 0.3), 8), config(8, 0.1));
  std::ostringstream out;
  write_trajectory_csv(out, traj, 3);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,m0,m1,m2,gel_mass,rho_1,rho_2,rho_3");
  std::ostringstream mom;
  write_moments_csv(mom, traj);
  EXPECT_EQ(mom.str().substr(0, mom.str().find('\n')), "t,m0,m1,m2,gel_mass,gel_flux");
}
