#pragma once

#include <string>

#include "frnet/models.hpp"

namespace frnet {

enum class ThreadMode { Single, Parallel };

const char* thread_mode_name(ThreadMode mode);

struct BenchReport {
  std::string arch;
  Shape input_shape;
  int warmup_runs = 0;
  int timed_runs = 0;
  double mean_ms = 0.0;
  double std_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  ThreadMode thread_mode = ThreadMode::Single;

  std::string to_text() const;
};

struct BenchOptions {
  int warmup = 3;
  int runs = 10;
  ThreadMode thread_mode = ThreadMode::Single;
  std::uint64_t input_seed = 0;
};

// Times eval-mode forward passes on a fixed random input of `input_shape`
// ([N, 1, H, W]). Only the forward call sits inside the timed region.
// Throws ConfigError for shapes the model rejects, warmup < 3 or runs < 10.
BenchReport bench_inference(SegmentationModel& model, const Shape& input_shape,
                            const BenchOptions& options = {});

// Linear-interpolated percentile of unsorted samples, q in [0, 1].
double percentile(std::vector<double> samples, double q);

}  // namespace frnet
