#include "frnet/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <random>
#include <thread>

#include "frnet/autograd.hpp"
#include "frnet/parallel.hpp"

namespace frnet {

const char* thread_mode_name(ThreadMode mode) {
  return mode == ThreadMode::Single ? "single" : "parallel";
}

std::string BenchReport::to_text() const {
  return fmt::format(
      "arch={}\ninput_shape={}\nwarmup_runs={}\ntimed_runs={}\nmean_ms={:.4f}\n"
      "std_ms={:.4f}\np50_ms={:.4f}\np95_ms={:.4f}\nthread_mode={}\n",
      arch, shape_to_string(input_shape), warmup_runs, timed_runs, mean_ms, std_ms,
      p50_ms, p95_ms, thread_mode_name(thread_mode));
}

double percentile(std::vector<double> samples, double q) {
  if (samples.empty()) throw ContractError("percentile: no samples");
  std::sort(samples.begin(), samples.end());
  const double pos = q * static_cast<double>(samples.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, samples.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return samples[lo] + (samples[hi] - samples[lo]) * frac;
}

BenchReport bench_inference(SegmentationModel& model, const Shape& input_shape,
                            const BenchOptions& options) {
  if (options.warmup < 3) throw ConfigError("bench: warmup must be >= 3");
  if (options.runs < 10) throw ConfigError("bench: runs must be >= 10");
  if (input_shape.size() != 4 || input_shape[1] != 1) {
    throw ConfigError("bench: input shape must be [N, 1, H, W], got " +
                      shape_to_string(input_shape));
  }
  try {
    model.check_input(input_shape);
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("bench: ") + e.what());
  }

  const DType dtype = model.parameters().front().dtype();
  std::mt19937_64 rng(options.input_seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<double> values(static_cast<std::size_t>(shape_numel(input_shape)));
  for (double& v : values) v = dist(rng);
  const Tensor input = Tensor::from_data(input_shape, std::move(values)).to(dtype);

  const int saved_threads = num_threads();
  set_num_threads(options.thread_mode == ThreadMode::Single
                      ? 1
                      : static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
  const bool was_training = model.is_training();
  model.eval();
  NoGradGuard no_grad;

  for (int i = 0; i < options.warmup; ++i) (void)model.forward(input);
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(options.runs));
  for (int i = 0; i < options.runs; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Tensor out = model.forward(input);
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  model.train(was_training);
  set_num_threads(saved_threads);

  BenchReport r;
  r.arch = arch_name(model.config().arch);
  r.input_shape = input_shape;
  r.warmup_runs = options.warmup;
  r.timed_runs = options.runs;
  r.thread_mode = options.thread_mode;
  const double n = static_cast<double>(times.size());
  r.mean_ms = std::accumulate(times.begin(), times.end(), 0.0) / n;
  double ss = 0.0;
  for (double t : times) ss += (t - r.mean_ms) * (t - r.mean_ms);
  r.std_ms = std::sqrt(ss / std::max(1.0, n - 1.0));
  r.p50_ms = percentile(times, 0.5);
  r.p95_ms = percentile(times, 0.95);
  return r;
}

}  // namespace frnet
