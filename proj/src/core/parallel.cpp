#include "mgmap/core/parallel.hpp"

#include <atomic>

namespace mgmap {

namespace {
std::atomic<int> g_threads{0};
}

int kernel_threads() {
  int t = g_threads.load(std::memory_order_relaxed);
  if (t > 0) return t;
  unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(hw == 0 ? 1u : hw, 4u));
}

void set_kernel_threads(int n) { g_threads.store(n, std::memory_order_relaxed); }

}  // namespace mgmap
