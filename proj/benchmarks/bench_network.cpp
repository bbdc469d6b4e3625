#include <benchmark/benchmark.h>

#include <vector>

#include "occur/curriculum.hpp"
#include "occur/network.hpp"
#include "occur/tensor.hpp"

using namespace occur;

namespace {

// 32x32 inputs through the default 64-32 classifier
std::vector<Sample> batch_of(std::size_t n) {
  Rng rng(4);
  std::vector<Sample> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> px(32 * 32);
    for (double& v : px) v = rng.uniform01();
    Sample s;
    s.image = DenseArray({32, 32}, px);
    s.label = i % 4;
    out.push_back(std::move(s));
  }
  return out;
}

const std::vector<std::size_t> kHidden{64, 32};

void BM_Forward(benchmark::State& state) {
  auto model = init_model(classifier_layers(32 * 32, kHidden, 4), 5);
  auto batch = batch_of(1);
  for (auto _ : state) benchmark::DoNotOptimize(forward(model, batch[0].image));
}
BENCHMARK(BM_Forward);

void BM_LossAndGradient(benchmark::State& state) {
  auto model = init_model(classifier_layers(32 * 32, kHidden, 4), 5);
  auto batch = batch_of(static_cast<std::size_t>(state.range(0)));
  std::vector<double> grad;
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_gradient(model, batch, grad));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LossAndGradient)->Arg(1)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
