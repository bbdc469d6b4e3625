#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "occur/histogram.hpp"
#include "occur/tensor.hpp"
#include "occur/transport.hpp"

using namespace occur;

namespace {

Histogram random_hist(Rng& rng, std::size_t bins) {
  std::vector<double> m(bins);
  for (double& v : m) v = rng.uniform01() + 1e-3;
  double total = std::accumulate(m.begin(), m.end(), 0.0);
  for (double& v : m) v /= total;
  m.back() = 1.0 - std::accumulate(m.begin(), m.end() - 1, 0.0);
  return Histogram::over_unit_interval(m);
}

void BM_W1(benchmark::State& state) {
  Rng rng(1);
  auto b = static_cast<std::size_t>(state.range(0));
  auto p = random_hist(rng, b), q = random_hist(rng, b);
  for (auto _ : state) benchmark::DoNotOptimize(w1_1d(p, q));
}
BENCHMARK(BM_W1)->RangeMultiplier(4)->Range(4, 256);

void BM_ExactTransport(benchmark::State& state) {
  Rng rng(2);
  auto b = static_cast<std::size_t>(state.range(0));
  auto p = random_hist(rng, b), q = random_hist(rng, b);
  auto cost = CostMatrix::bin_distance(b);
  for (auto _ : state) benchmark::DoNotOptimize(solve_transport(p, q, cost).objective);
}
BENCHMARK(BM_ExactTransport)->RangeMultiplier(2)->Range(4, 32);

// ε in thousandths
void BM_Sinkhorn(benchmark::State& state) {
  Rng rng(3);
  const std::size_t b = 8;
  auto p = random_hist(rng, b), q = random_hist(rng, b);
  auto cost = CostMatrix::bin_distance(b);
  double eps = static_cast<double>(state.range(0)) * 1e-3;
  std::size_t iters = 0;
  for (auto _ : state) {
    auto res = sinkhorn(p, q, cost, eps, 100000, 1e-10);
    iters = res.iterations;
    benchmark::DoNotOptimize(res.cost);
  }
  state.counters["iterations"] = static_cast<double>(iters);
}
BENCHMARK(BM_Sinkhorn)->Arg(100)->Arg(10)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
