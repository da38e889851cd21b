#include "frnet/parallel.hpp"

#include <algorithm>
#include <atomic>

namespace frnet {

namespace {
std::atomic<int> g_threads{1};
}

void set_num_threads(int n) { g_threads = std::max(1, n); }

int num_threads() noexcept { return g_threads; }

}  // namespace frnet
