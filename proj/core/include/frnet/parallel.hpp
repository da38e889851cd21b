#pragma once

#include <cstdint>

namespace frnet {

// Number of worker threads kernels may use. Defaults to 1. Kernels split
// work into fixed-size pieces independent of this value, so results are
// bit-identical for any thread count.
void set_num_threads(int n);
int num_threads() noexcept;

template <typename F>
void parallel_for(std::int64_t n, F&& fn) {
#if defined(FRNET_HAVE_OPENMP)
  const int threads = num_threads();
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
  for (std::int64_t i = 0; i < n; ++i) fn(i);
#else
  for (std::int64_t i = 0; i < n; ++i) fn(i);
#endif
}

}  // namespace frnet
