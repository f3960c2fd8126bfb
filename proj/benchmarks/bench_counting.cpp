#include <benchmark/benchmark.h>

#include <vector>

#include "zncount/counting.hpp"
#include "zncount/random.hpp"
#include "zncount/spectrum.hpp"
#include "zncount/zn_core.hpp"

using namespace zncount;

namespace {

CyclicFunction random_density(std::int64_t n) {
  Rng rng(static_cast<std::uint64_t>(n));
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = rng.uniform();
  return CyclicFunction::from_real(v);
}

const EquationForm kEq({1, 1, -2});

void BM_CountBrute(benchmark::State& state) {
  const auto f = random_density(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(count_bruteforce(f, kEq));
  state.SetComplexityN(state.range(0));
}

void BM_CountFourier(benchmark::State& state) {
  const auto f = random_density(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(count_fourier(f, kEq, DftMethod::bluestein));
  state.SetComplexityN(state.range(0));
}

void BM_DftDirect(benchmark::State& state) {
  const auto f = random_density(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dft(f, DftMethod::direct));
  state.SetComplexityN(state.range(0));
}

void BM_DftBluestein(benchmark::State& state) {
  const auto f = random_density(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dft(f, DftMethod::bluestein));
  state.SetComplexityN(state.range(0));
}

void BM_SortSpectrum(benchmark::State& state) {
  const auto f = random_density(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sort_spectrum(f));
}

}  // namespace

BENCHMARK(BM_CountBrute)->RangeMultiplier(4)->Range(64, 4096)->Complexity();
BENCHMARK(BM_CountFourier)->RangeMultiplier(4)->Range(64, 4096)->Complexity();
BENCHMARK(BM_DftDirect)->RangeMultiplier(4)->Range(64, 4096)->Complexity();
BENCHMARK(BM_DftBluestein)->RangeMultiplier(4)->Range(64, 4096)->Complexity();
BENCHMARK(BM_SortSpectrum)->Arg(1009)->Arg(4999);
BENCHMARK_MAIN();
