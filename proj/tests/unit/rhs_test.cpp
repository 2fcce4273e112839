#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "critcf/convolution.hpp"
#include "critcf/equilibrium.hpp"
#include "critcf/rhs.hpp"

using namespace critcf;

namespace {

// Gel flux by enumerating ordered pairs whose product lies past N.
double gel_flux_by_pairs(std::span<const double> rho) {
  const std::size_t n = rho.size();
  double flux = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    for (std::size_t k = 1; k <= n; ++k) {
      if (j + k <= n) continue;
      flux += 0.5 * static_cast<double>(j + k) * static_cast<double>(j * k) * rho[j - 1] * rho[k - 1];
    }
  }
  return flux;
}

double mass_defect(const RhsOutput& d) {
  double s = d.d_gel_mass;
  for (std::size_t j = 0; j < d.d_densities.size(); ++j) s += static_cast<double>(j + 1) * d.d_densities[j];
  return s;
}

std::vector<double> random_sparse(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n, 0.0);
  for (auto& x : v) {
    if (u(gen) < 0.6) x = u(gen) / static_cast<double>(n);
  }
  return v;
}

}  // namespace

TEST(Coagulation, MonomersPair) {
  const auto d = coagulation(SizeDistribution::sparse(4, {{1, 1.0}}), ConvolutionMode::direct);
  EXPECT_DOUBLE_EQ(d.d_densities[0], -1.0);
  EXPECT_DOUBLE_EQ(d.d_densities[1], 0.5);
  EXPECT_EQ(d.d_densities[2], 0.0);
  EXPECT_EQ(d.d_densities[3], 0.0);
  EXPECT_EQ(d.d_gel_mass, 0.0);
}

TEST(Coagulation, ZeroIsFixed) {
  for (auto mode : {ConvolutionMode::direct, ConvolutionMode::fft}) {
    const auto d = coagulation(SizeDistribution(8), mode);
    for (double v : d.d_densities) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(d.d_gel_mass, 0.0);
  }
}

TEST(Coagulation, ProductsPastTruncationBecomeGel) {
  for (auto mode : {ConvolutionMode::direct, ConvolutionMode::fft}) {
    const auto d = coagulation(SizeDistribution::sparse(4, {{3, 1.0}}), mode);
    EXPECT_NEAR(d.d_densities[2], -9.0, 1e-14);
    EXPECT_NEAR(d.d_densities[0], 0.0, 1e-14);
    EXPECT_NEAR(d.d_densities[1], 0.0, 1e-14);
    EXPECT_NEAR(d.d_densities[3], 0.0, 1e-14);
    EXPECT_NEAR(d.d_gel_mass, 27.0, 1e-13);
  }
}

TEST(Fragmentation, Dimer) {
  const auto d = fragmentation(SizeDistribution::sparse(4, {{2, 1.0}}));
  EXPECT_DOUBLE_EQ(d.d_densities[0], 1.0);
  EXPECT_DOUBLE_EQ(d.d_densities[1], -0.5);
  EXPECT_EQ(d.d_gel_mass, 0.0);
  EXPECT_EQ(mass_defect(d), 0.0);
}

TEST(Fragmentation, MonomersInert) {
  const auto d = fragmentation(SizeDistribution::sparse(4, {{1, 0.37}}));
  for (double v : d.d_densities) EXPECT_EQ(v, 0.0);
}

TEST(Fragmentation, Trimer) {
  const auto d = fragmentation(SizeDistribution::sparse(4, {{3, 1.0}}));
  EXPECT_DOUBLE_EQ(d.d_densities[0], 1.0);
  EXPECT_DOUBLE_EQ(d.d_densities[1], 1.0);
  EXPECT_DOUBLE_EQ(d.d_densities[2], -1.0);
  EXPECT_EQ(d.d_densities[3], 0.0);
}

TEST(Rhs, DimersCombined) {
  const auto d = rhs(SizeDistribution::sparse(8, {{2, 1.0}}), ConvolutionMode::direct);
  EXPECT_DOUBLE_EQ(d.d_densities[0], 1.0);
  EXPECT_DOUBLE_EQ(d.d_densities[1], -4.5);
  EXPECT_DOUBLE_EQ(d.d_densities[3], 2.0);
  for (std::size_t j : {3u, 5u, 6u, 7u, 8u}) EXPECT_EQ(d.d_densities[j - 1], 0.0) << j;
  EXPECT_EQ(d.d_gel_mass, 0.0);
}

TEST(Rhs, ZeroIsFixed) {
  const auto d = rhs(SizeDistribution(32), ConvolutionMode::automatic);
  for (double v : d.d_densities) EXPECT_EQ(v, 0.0);
}

TEST(Rhs, StationaryTableIsFixedPoint) {
  const auto table = recursion(0.3, 2048);
  const auto d = rhs(SizeDistribution(table.values), ConvolutionMode::automatic);
  double worst = 0.0;
  for (std::size_t j = 0; j < 1024; ++j) worst = std::max(worst, std::abs(d.d_densities[j]));
  EXPECT_LE(worst, 1e-8);
}

// Relative error is taken against the largest term magnitude (gain, loss and
// fragmentation summed in absolute value) over all sizes: FFT rounding is
// spread across every output, so components whose terms cancel or vanish
// carry noise at the scale of the whole vector.
TEST(Rhs, FftMatchesDirectOnRandomInstances) {
  std::mt19937_64 gen(20240611);
  std::uniform_int_distribution<std::size_t> pick(2, 64);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = pick(gen);
    const SizeDistribution rho(random_sparse(gen, n));
    const auto direct = rhs(rho, ConvolutionMode::direct);
    const auto fast = rhs(rho, ConvolutionMode::fft);

    const auto dens = rho.densities();
    std::vector<double> weighted(n), gain(n);
    for (std::size_t j = 0; j < n; ++j) weighted[j] = static_cast<double>(j + 1) * dens[j];
    self_convolve(weighted, gain, ConvolutionMode::direct);
    const double m1 = moment(rho, 1);
    double suffix = 0.0;
    std::vector<double> scale(n);
    for (std::size_t j = n; j-- > 0;) {
      scale[j] = 0.5 * gain[j] + weighted[j] * m1 + 0.5 * static_cast<double>(j) * dens[j] + suffix;
      suffix += dens[j];
    }
    const double norm = *std::max_element(scale.begin(), scale.end());
    for (std::size_t j = 0; j < n; ++j) {
      EXPECT_LE(std::abs(direct.d_densities[j] - fast.d_densities[j]), 1e-12 * norm)
          << "trial " << trial << " size " << j + 1;
    }
    EXPECT_LE(std::abs(direct.d_gel_mass - fast.d_gel_mass), 1e-12 * m1 * m1 * static_cast<double>(n) + 1e-300);
  }
}

TEST(Rhs, GelFluxMatchesPairEnumeration) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial) % 63;
    const SizeDistribution rho(random_sparse(gen, n));
    const double oracle = gel_flux_by_pairs(rho.densities());
    for (auto mode : {ConvolutionMode::direct, ConvolutionMode::fft}) {
      const auto d = coagulation(rho, mode);
      EXPECT_NEAR(d.d_gel_mass, oracle, 1e-12 * std::max(oracle, moment(rho, 1) * moment(rho, 2)));
    }
  }
}

TEST(Rhs, MassClosureAndCountIdentity) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    const SizeDistribution rho(random_sparse(gen, 40));
    const double m1 = moment(rho, 1);
    const auto d = rhs(rho, ConvolutionMode::automatic);
    EXPECT_LE(std::abs(mass_defect(d)), 1e-10 * m1 * m1 + 1e-10 * m1);
  }
  // No mass near the truncation: the weak form with g = 1 holds exactly.
  std::vector<double> v(64, 0.0);
  for (std::size_t j = 0; j < 16; ++j) v[j] = 0.01 / static_cast<double>(j + 1);
  const SizeDistribution rho(v);
  const auto d = rhs(rho, ConvolutionMode::direct);
  ASSERT_EQ(d.d_gel_mass, 0.0);
  double total = 0.0;
  for (double x : d.d_densities) total += x;
  const double m0 = moment(rho, 0), m1 = moment(rho, 1);
  EXPECT_NEAR(total, 0.5 * (m1 - m1 * m1) - 0.5 * m0, 1e-10 * m1 * m1 + 1e-10 * m1);
}

TEST(RhsEvaluator, ThreadCountDoesNotChangeResult) {
  std::mt19937_64 gen(11);
  const auto v = random_sparse(gen, 100);
  RhsEvaluator one(100, ConvolutionMode::direct, 1);
  RhsEvaluator four(100, ConvolutionMode::direct, 4);
  std::vector<double> a(100), b(100);
  const double fa = one.evaluate(v, a);
  const double fb = four.evaluate(v, b);
  EXPECT_EQ(a, b);
  EXPECT_EQ(fa, fb);
}

TEST(SelfConvolver, FftRepeatsBitIdentically) {
  std::mt19937_64 gen(5);
  const auto v = random_sparse(gen, 300);
  std::vector<double> a(300), b(300);
  SelfConvolver c1(300, ConvolutionMode::fft);
  c1.convolve(v, a);
  SelfConvolver c2(300, ConvolutionMode::fft);
  c2.convolve(v, b);
  EXPECT_EQ(a, b);
  EXPECT_EQ(resolve_mode(ConvolutionMode::automatic, 64), ConvolutionMode::direct);
  EXPECT_EQ(resolve_mode(ConvolutionMode::automatic, 4096), ConvolutionMode::fft);
}
