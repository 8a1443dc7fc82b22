// Serial reference loops against the OpenMP kernels.
//   bench_kernels --benchmark_filter=conv

#include <benchmark/benchmark.h>

#include <random>

#include "dia/match.hpp"
#include "dia/net.hpp"
#include "dia/pipeline.hpp"
#include "dia/reference.hpp"

namespace {

using namespace dia;

FeatureMap random_map(int h, int w, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FeatureMap m(h, w, c);
  for (double& v : m.data()) v = u(rng);
  return m;
}

ConvLayer random_conv(int inC, int outC) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 0.1);
  ConvLayer conv;
  conv.name = "bench";
  conv.inChannels = inC;
  conv.outChannels = outC;
  conv.kernelH = conv.kernelW = 3;
  conv.padding = 1;
  conv.weight.resize(static_cast<std::size_t>(outC) * inC * 9);
  for (double& w : conv.weight) w = g(rng);
  conv.bias.assign(static_cast<std::size_t>(outC), 0.0);
  return conv;
}

Image random_image(int h, int w) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> u(0, 255);
  Image img(h, w);
  for (auto& v : img.rgb()) v = static_cast<std::uint8_t>(u(rng));
  return img;
}

// Channels in range(0); spatial size 56.
void BM_ConvForward_Reference(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const FeatureMap in = random_map(56, 56, c, 3);
  const ConvLayer conv = random_conv(c, c);
  for (auto _ : state) benchmark::DoNotOptimize(reference::conv2d_forward(in, conv));
}
void BM_ConvForward_Parallel(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const FeatureMap in = random_map(56, 56, c, 3);
  const ConvLayer conv = random_conv(c, c);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_forward(in, conv));
}
BENCHMARK(BM_ConvForward_Reference)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvForward_Parallel)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ConvBackward_Reference(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const FeatureMap g = random_map(56, 56, c, 4);
  const ConvLayer conv = random_conv(c, c);
  for (auto _ : state) benchmark::DoNotOptimize(reference::conv2d_backward(g, conv, 56, 56));
}
void BM_ConvBackward_Parallel(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const FeatureMap g = random_map(56, 56, c, 4);
  const ConvLayer conv = random_conv(c, c);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_backward(g, conv, 56, 56));
}
BENCHMARK(BM_ConvBackward_Reference)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvBackward_Parallel)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

struct MatchFixture {
  FeatureMap a, a2, b, b2;
  NNField nnf;
  explicit MatchFixture(int side)
      : a(normalize(random_map(side, side, 64, 5))), a2(normalize(random_map(side, side, 64, 6))),
        b(normalize(random_map(side, side, 64, 7))), b2(normalize(random_map(side, side, 64, 8))),
        nnf(random_nnf(side, side, side, side, 9)) {}
  MatchMaps maps() const { return {a, a2, b, b2}; }
};

void BM_CostField_Reference(benchmark::State& state) {
  const MatchFixture f(64);
  for (auto _ : state) benchmark::DoNotOptimize(reference::cost_field(f.maps(), f.nnf, 2, true));
}
void BM_CostField_Parallel(benchmark::State& state) {
  const MatchFixture f(64);
  for (auto _ : state) benchmark::DoNotOptimize(cost_field(f.maps(), f.nnf, 2, true));
}
BENCHMARK(BM_CostField_Reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CostField_Parallel)->Unit(benchmark::kMillisecond);

void BM_Exhaustive_Reference(benchmark::State& state) {
  const MatchFixture f(16);
  for (auto _ : state) benchmark::DoNotOptimize(reference::exhaustive_nnf(f.maps(), 1));
}
void BM_Exhaustive_Parallel(benchmark::State& state) {
  const MatchFixture f(16);
  for (auto _ : state) benchmark::DoNotOptimize(exhaustive_nnf(f.maps(), 1));
}
BENCHMARK(BM_Exhaustive_Reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Exhaustive_Parallel)->Unit(benchmark::kMillisecond);

void BM_Aggregate_Reference(benchmark::State& state) {
  const Image src = random_image(224, 224);
  const NNField nnf = random_nnf(224, 224, 224, 224, 10);
  for (auto _ : state) benchmark::DoNotOptimize(reference::aggregate_output(src, nnf, 2));
}
void BM_Aggregate_Parallel(benchmark::State& state) {
  const Image src = random_image(224, 224);
  const NNField nnf = random_nnf(224, 224, 224, 224, 10);
  for (auto _ : state) benchmark::DoNotOptimize(aggregate_output(src, nnf, 2));
}
BENCHMARK(BM_Aggregate_Reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Aggregate_Parallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
