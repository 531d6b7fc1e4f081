// SPDX-License-Identifier: MIT
//
// Microbenchmarks for the hot paths: network evaluation, RNG draw,
// and quasi-Monte Carlo averaging.  More cases land with the estimators.
#include <benchmark/benchmark.h>

#include <cmath>
#include <span>
#include <vector>

#include "singlab/activation.hpp"
#include "singlab/network.hpp"
#include "singlab/quadrature.hpp"
#include "singlab/rng.hpp"

namespace {

singlab::Network make_chain(int depth, int width) {
  using singlab::Layer;
  singlab::Network net;
  net.act = singlab::Activation::leaky_relu(0.2);
  std::vector<double> w(static_cast<std::size_t>(width) * width);
  singlab::rng::Counter rng(7, "bench-chain");
  for (auto& v : w) v = rng.next_uniform(-0.4, 0.4);
  std::vector<double> b(width, 0.01);
  net.layers.push_back(Layer::dense(1, width, std::vector<double>(width, 0.5), b));
  for (int i = 0; i < depth - 2; ++i) net.layers.push_back(Layer::dense(width, width, w, b));
  net.layers.push_back(Layer::dense(width, 1, std::vector<double>(width, 0.1), {0.0}));
  net.check();
  return net;
}

void BM_NetworkEval(benchmark::State& state) {
  auto net = make_chain(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  singlab::Evaluator ev(net);
  double x = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ev.eval1(x));
    x = std::fmod(x + 0.001, 1.0);
  }
}
BENCHMARK(BM_NetworkEval)->Args({4, 16})->Args({12, 32});

void BM_CounterNormal(benchmark::State& state) {
  singlab::rng::Counter rng(123, "bench-normal");
  for (auto _ : state) benchmark::DoNotOptimize(rng.next_normal());
}
BENCHMARK(BM_CounterNormal);

void BM_QmcMean(benchmark::State& state) {
  const auto box = singlab::quad::Box::unit(2);
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    double m = singlab::quad::qmc_mean(
        box, n, [](std::span<const double> x) { return x[0] * x[1]; });
    benchmark::DoNotOptimize(m);
  }
}
BENCHMARK(BM_QmcMean)->Arg(1 << 12);

}  // namespace

BENCHMARK_MAIN();
