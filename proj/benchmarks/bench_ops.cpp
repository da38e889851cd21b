#include <benchmark/benchmark.h>

#include <random>

#include "frnet/autograd.hpp"
#include "frnet/conv.hpp"
#include "frnet/norm.hpp"
#include "frnet/ops.hpp"

namespace {

using namespace frnet;

Tensor random_tensor(const Shape& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<float> v(static_cast<std::size_t>(shape_numel(shape)));
  for (float& x : v) x = dist(rng);
  return Tensor::from_data(shape, std::move(v));
}

void BM_Conv3x3(benchmark::State& state, ConvAlgorithm algo) {
  const std::int64_t c = state.range(0), s = state.range(1);
  const ConvSpec spec = dense_conv(c, c, 3);
  const Tensor x = random_tensor({1, c, s, s}, 1);
  const Tensor w = random_tensor(spec.weight_shape(), 2);
  const Tensor b = random_tensor({c}, 3);
  NoGradGuard ng;
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, w, b, spec, algo));
  state.counters["MAC/s"] = benchmark::Counter(
      static_cast<double>(c * c * 9 * s * s), benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK_CAPTURE(BM_Conv3x3, im2col, ConvAlgorithm::Im2col)
    ->Args({32, 256})
    ->Args({64, 128})
    ->Args({44, 256})
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Conv3x3, direct, ConvAlgorithm::Direct)
    ->Args({32, 64})
    ->Unit(benchmark::kMillisecond);

void BM_Depthwise7x7(benchmark::State& state) {
  const std::int64_t c = 32, s = state.range(0);
  const ConvSpec spec = depthwise_conv(c, 7);
  const Tensor x = random_tensor({1, c, s, s}, 1);
  const Tensor w = random_tensor(spec.weight_shape(), 2);
  const Tensor b = random_tensor({c}, 3);
  NoGradGuard ng;
  for (auto _ : state) benchmark::DoNotOptimize(depthwise_conv2d(x, w, b, spec));
}
BENCHMARK(BM_Depthwise7x7)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_ChannelNorm(benchmark::State& state) {
  const Tensor x = random_tensor({1, 32, 256, 256}, 1);
  const Tensor g = Tensor::full({32}, 1.0), b = Tensor::zeros({32});
  NoGradGuard ng;
  for (auto _ : state) benchmark::DoNotOptimize(channel_norm(x, g, b));
}
BENCHMARK(BM_ChannelNorm)->Unit(benchmark::kMillisecond);

void BM_BatchNormEval(benchmark::State& state) {
  const Tensor x = random_tensor({1, 32, 256, 256}, 1);
  const Tensor g = Tensor::full({32}, 1.0), b = Tensor::zeros({32});
  Tensor rm = Tensor::zeros({32}), rv = Tensor::full({32}, 1.0);
  NoGradGuard ng;
  for (auto _ : state) {
    benchmark::DoNotOptimize(batch_norm(x, g, b, rm, rv, NormMode::Eval));
  }
}
BENCHMARK(BM_BatchNormEval)->Unit(benchmark::kMillisecond);

void BM_Gelu(benchmark::State& state) {
  const Tensor x = random_tensor({1, 32, 256, 256}, 1);
  NoGradGuard ng;
  for (auto _ : state) benchmark::DoNotOptimize(gelu(x));
}
BENCHMARK(BM_Gelu)->Unit(benchmark::kMillisecond);

void BM_Relu(benchmark::State& state) {
  const Tensor x = random_tensor({1, 32, 256, 256}, 1);
  NoGradGuard ng;
  for (auto _ : state) benchmark::DoNotOptimize(relu(x));
}
BENCHMARK(BM_Relu)->Unit(benchmark::kMillisecond);

void BM_Add(benchmark::State& state) {
  const Tensor x = random_tensor({1, 32, 256, 256}, 1);
  const Tensor y = random_tensor({1, 32, 256, 256}, 2);
  NoGradGuard ng;
  for (auto _ : state) benchmark::DoNotOptimize(add(x, y));
}
BENCHMARK(BM_Add)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
