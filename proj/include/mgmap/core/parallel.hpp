#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace mgmap {

// Process-wide kernel thread count; set once from config before heavy work.
int kernel_threads();
void set_kernel_threads(int n);

// Static row partition: chunk boundaries depend only on (n, threads), so
// floating-point results are reproducible for a fixed thread count.
template <typename F>
void parallel_for(long n, F&& fn) {
  int t = kernel_threads();
  if (t <= 1 || n < 64) {
    fn(0L, n, 0);
    return;
  }
  t = static_cast<int>(std::min<long>(t, n));
  std::vector<std::thread> workers;
  workers.reserve(t - 1);
  long chunk = (n + t - 1) / t;
  for (int i = 1; i < t; ++i) {
    long b = i * chunk, e = std::min(n, (i + 1) * chunk);
    if (b >= e) break;
    workers.emplace_back([&fn, b, e, i] { fn(b, e, i); });
  }
  fn(0L, std::min(n, chunk), 0);
  for (auto& w : workers) w.join();
}

}  // namespace mgmap
