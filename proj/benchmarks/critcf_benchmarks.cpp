#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "critcf/bernstein.hpp"
#include "critcf/equilibrium.hpp"
#include "critcf/rhs.hpp"

namespace {

std::vector<double> random_densities(std::size_t n) {
  std::mt19937_64 gen(n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(gen) / static_cast<double>(n);
  return v;
}

template <critcf::ConvolutionMode Mode>
void BM_Rhs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto rho = random_densities(n);
  critcf::RhsEvaluator eval(n, Mode);
  std::vector<double> d(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval.evaluate(rho, d));
    benchmark::ClobberMemory();
  }
  state.SetComplexityN(state.range(0));
}

template <critcf::RecursionMethod Method>
void BM_Recursion(benchmark::State& state) {
  const auto length = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(critcf::recursion(0.3, length, Method).partial_m1);
  state.SetComplexityN(state.range(0));
}

void BM_TransformG(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const critcf::SizeDistribution rho(random_densities(n));
  const auto nodes = critcf::z_grid_nodes(1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(critcf::transform_G(rho, nodes).values.data());
}

}  // namespace

BENCHMARK(BM_Rhs<critcf::ConvolutionMode::direct>)->RangeMultiplier(2)->Range(64, 8192)->Complexity();
BENCHMARK(BM_Rhs<critcf::ConvolutionMode::fft>)->RangeMultiplier(2)->Range(64, 16384)->Complexity();
BENCHMARK(BM_Recursion<critcf::RecursionMethod::direct>)->RangeMultiplier(2)->Range(1024, 16384)->Complexity();
BENCHMARK(BM_Recursion<critcf::RecursionMethod::fft>)->RangeMultiplier(2)->Range(1024, 65536)->Complexity();
BENCHMARK(BM_TransformG)->Arg(512)->Arg(4096);
BENCHMARK_MAIN();
