#include <benchmark/benchmark.h>

#include "gevr/distributions.hpp"
#include "gevr/gof.hpp"
#include "gevr/inference.hpp"

namespace {

gevr::RLargestSample null_sample(std::size_t n, std::size_t r) {
  return gevr::sample_gevr(n, r, {0.0, 1.0, 0.0}, gevr::RngStream(2024));
}

void BM_Fit(benchmark::State& state) {
  const auto s = null_sample(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(gevr::fit_gevr(s));
}
BENCHMARK(BM_Fit)->Args({50, 1})->Args({100, 5})->Args({100, 10})->Args({1000, 5})->Unit(benchmark::kMillisecond);

void BM_ExpectedInformation(benchmark::State& state) {
  const auto r = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gevr::expected_information(r, {0.0, 1.0, 0.2}));
}
BENCHMARK(BM_ExpectedInformation)->Arg(1)->Arg(5)->Arg(10);

void BM_EdTest(benchmark::State& state) {
  const auto s = null_sample(100, static_cast<std::size_t>(state.range(0)));
  const auto fit = gevr::fit_gevr(s);
  for (auto _ : state) benchmark::DoNotOptimize(gevr::ed_test(s, fit));
}
BENCHMARK(BM_EdTest)->Arg(2)->Arg(5)->Arg(10);

// Single-threaded so that the two bootstraps are compared like for like.
void BM_MultiplierBootstrap(benchmark::State& state) {
  const auto s = null_sample(100, 5);
  gevr::BootstrapOptions opt;
  opt.L = static_cast<std::size_t>(state.range(0));
  opt.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(gevr::mb_score_test(s, gevr::RngStream(7), opt));
}
BENCHMARK(BM_MultiplierBootstrap)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_ParametricBootstrap(benchmark::State& state) {
  const auto s = null_sample(100, 5);
  gevr::BootstrapOptions opt;
  opt.L = static_cast<std::size_t>(state.range(0));
  opt.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(gevr::pb_score_test(s, gevr::RngStream(7), opt));
}
BENCHMARK(BM_ParametricBootstrap)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
