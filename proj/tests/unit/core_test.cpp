#include <gtest/gtest.h>

#include <random>

#include "critcf/core.hpp"
#include "critcf/error.hpp"

using namespace critcf;

TEST(SizeDistribution, RejectsBadInput) {
  EXPECT_THROW(SizeDistribution(1), ValidationError);
  EXPECT_THROW(SizeDistribution(std::vector<double>{0.1}), ValidationError);
  EXPECT_THROW(SizeDistribution(std::vector<double>{0.1, -1e-3}), ValidationError);
  EXPECT_THROW(SizeDistribution(std::vector<double>{0.1, 0.2}, -1.0), ValidationError);
  EXPECT_THROW(SizeDistribution::sparse(4, {{5, 1.0}}), ValidationError);
}

TEST(SizeDistribution, OneBasedAccess) {
  const auto rho = SizeDistribution::sparse(4, {{3, 0.7}});
  EXPECT_EQ(rho.truncation(), 4u);
  EXPECT_EQ(rho.at(3), 0.7);
  EXPECT_EQ(rho.densities()[2], 0.7);
  EXPECT_THROW((void)rho.at(0), std::out_of_range);
  EXPECT_THROW((void)rho.at(5), std::out_of_range);
}

TEST(Moment, SingleMonomer) {
  EXPECT_DOUBLE_EQ(moment(SizeDistribution::sparse(8, {{1, 0.4}}), 1), 0.4);
}

TEST(Moment, ZeroDistribution) {
  const SizeDistribution rho(16);
  for (int order = 0; order <= 3; ++order) EXPECT_EQ(moment(rho, order), 0.0);
}

TEST(Moment, SecondMomentByHand) {
  EXPECT_DOUBLE_EQ(moment(SizeDistribution::sparse(4, {{1, 0.1}, {2, 0.1}}), 2), 0.5);
}

TEST(Moment, RejectsOrder) {
  EXPECT_THROW((void)moment(SizeDistribution(4), 4), ValidationError);
  EXPECT_THROW((void)moment(SizeDistribution(4), -1), ValidationError);
}

TEST(Moment, LinearAndOrdered) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(12), b(12), c(12);
    const double alpha = u(gen), beta = u(gen);
    for (std::size_t i = 0; i < 12; ++i) {
      a[i] = u(gen);
      b[i] = u(gen);
      c[i] = alpha * a[i] + beta * b[i];
    }
    for (int order = 0; order <= 3; ++order) {
      const double lhs = moment(c, order);
      const double rhs = alpha * moment(a, order) + beta * moment(b, order);
      EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(rhs));
    }
    const auto mv = moments(SizeDistribution(c));
    EXPECT_LE(mv.m0, mv.m1);
    EXPECT_LE(mv.m1, mv.m2);
  }
}

TEST(BuildInitial, Monodisperse) {
  const auto rho = build_initial(InitialDataSpec::monodisperse(1, 0.3), 512);
  EXPECT_EQ(rho.at(1), 0.3);
  EXPECT_EQ(moment(rho, 1), 0.3);
  EXPECT_EQ(moment(rho, 0), 0.3);
  EXPECT_EQ(rho.gel_mass(), 0.0);
}

TEST(BuildInitial, ExplicitList) {
  const auto spec = InitialDataSpec::explicit_list({0.5, 0.25});
  EXPECT_DOUBLE_EQ(spec.declared_mass, 1.0);
  EXPECT_DOUBLE_EQ(moment(build_initial(spec, 8), 1), 1.0);
}

TEST(BuildInitial, GeometricPrefactor) {
  const auto rho = build_initial(InitialDataSpec::geometric(0.5, 0.3), 128);
  EXPECT_NEAR(rho.at(1), 0.15 * 0.5, 1e-15);
  EXPECT_NEAR(rho.at(2), 0.15 * 0.25, 1e-15);
  EXPECT_NEAR(moment(rho, 1), 0.3, 1e-12 * 0.3);
}

TEST(BuildInitial, Rejections) {
  EXPECT_THROW(build_initial(InitialDataSpec::geometric(1.0, 0.3), 64), ValidationError);
  EXPECT_THROW(build_initial(InitialDataSpec::geometric(0.0, 0.3), 64), ValidationError);
  EXPECT_THROW(build_initial(InitialDataSpec::explicit_list({0.5, -0.1}), 8), ValidationError);
  // q = 0.9 leaves mass far beyond size 16.
  EXPECT_THROW(build_initial(InitialDataSpec::geometric(0.9, 0.3), 16), ValidationError);
  EXPECT_THROW(build_initial(InitialDataSpec::monodisperse(9, 0.1), 8), ValidationError);
}

TEST(ParseInitialData, Kinds) {
  const auto mono = parse_initial_data("monodisperse:1", 0.3);
  EXPECT_DOUBLE_EQ(std::get<Monodisperse>(mono.kind).density, 0.3);
  const auto mono2 = parse_initial_data("monodisperse:2:0.25", std::nullopt);
  EXPECT_DOUBLE_EQ(mono2.declared_mass, 0.5);
  const auto geo = parse_initial_data("geometric:0.5", 0.3);
  EXPECT_DOUBLE_EQ(std::get<Geometric>(geo.kind).ratio, 0.5);
  const auto list = parse_initial_data("explicit:0.5,0.25", std::nullopt);
  EXPECT_DOUBLE_EQ(list.declared_mass, 1.0);
  EXPECT_EQ(describe(list), "explicit:0.5,0.25");
}

TEST(ParseInitialData, Rejections) {
  EXPECT_THROW(parse_initial_data("monodisperse", 0.3), ValidationError);
  EXPECT_THROW(parse_initial_data("monodisperse:1", std::nullopt), ValidationError);
  EXPECT_THROW(parse_initial_data("geometric:0.5", std::nullopt), ValidationError);
  EXPECT_THROW(parse_initial_data("explicit:0.5,x", std::nullopt), ValidationError);
  EXPECT_THROW(parse_initial_data("explicit:0.5,0.25", 0.7), ValidationError);
  EXPECT_THROW(parse_initial_data("lognormal:1", 0.3), ValidationError);
}

TEST(ConvolutionModeText, RoundTrip) {
  for (auto mode : {ConvolutionMode::direct, ConvolutionMode::fft, ConvolutionMode::automatic}) {
    EXPECT_EQ(parse_convolution_mode(to_string(mode)), mode);
  }
  EXPECT_THROW(parse_convolution_mode("fast"), ValidationError);
}

TEST(SimulationConfig, Validation) {
  SimulationConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.t_end = 0.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.abs_tol = 0.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.output_stride = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
}
