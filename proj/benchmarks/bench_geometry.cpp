#include <benchmark/benchmark.h>

#include "occur/geometry.hpp"

using namespace occur;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

void BM_ChristoffelHalfplane(benchmark::State& state) {
  auto g = MetricField::halfplane();
  Vec x = v2(0.3, 1.2);
  for (auto _ : state) benchmark::DoNotOptimize(christoffel(g, x)(1, 0, 0));
}
BENCHMARK(BM_ChristoffelHalfplane);

void BM_ChristoffelEuclidean(benchmark::State& state) {
  auto d = static_cast<std::size_t>(state.range(0));
  auto g = MetricField::euclidean(d);
  Vec x = Vec::Constant(static_cast<Eigen::Index>(d), 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(christoffel(g, x)(0, 0, 0));
}
BENCHMARK(BM_ChristoffelEuclidean)->Arg(2)->Arg(4)->Arg(8);

void BM_IntegrateRk4(benchmark::State& state) {
  auto g = MetricField::halfplane();
  auto steps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto path = integrate_geodesic(v2(0, 1), v2(1, 0), g, 1.0 / static_cast<double>(steps), steps, Integrator::rk4);
    benchmark::DoNotOptimize(path.points.back());
  }
}
BENCHMARK(BM_IntegrateRk4)->Arg(100)->Arg(1000);

void BM_GeodesicDistance(benchmark::State& state) {
  auto g = MetricField::halfplane();
  ShootingConfig cfg;
  cfg.steps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(geodesic_distance(v2(-1, 1), v2(1, 1), g, cfg));
}
BENCHMARK(BM_GeodesicDistance)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
