#include <benchmark/benchmark.h>

#include "frnet/bench.hpp"
#include "frnet/models.hpp"

namespace {

using namespace frnet;

void BM_Forward(benchmark::State& state, Arch arch) {
  const std::int64_t s = state.range(0);
  auto model = build_model(ModelConfig::for_arch(arch), 0);
  BenchOptions opts;
  opts.warmup = 3;
  opts.runs = 10;
  for (auto _ : state) {
    const BenchReport r = bench_inference(*model, {1, 1, s, s}, opts);
    state.SetIterationTime(r.mean_ms / 1000.0);
  }
}
BENCHMARK_CAPTURE(BM_Forward, frnet_base, Arch::FRNetBase)
    ->Arg(64)->Arg(256)->UseManualTime()->Iterations(1)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Forward, frnet, Arch::FRNet)
    ->Arg(64)->Arg(256)->UseManualTime()->Iterations(1)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Forward, unet_baseline, Arch::UNetBaseline)
    ->Arg(64)->Arg(256)->UseManualTime()->Iterations(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
