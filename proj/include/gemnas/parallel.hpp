#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace gemnas {

// Runs fn(i) for i in [0, count) on up to `workers` threads. Each index is
// processed independently, so results are identical for any worker count;
// callers needing ordered output should write into preallocated slots by index.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  if (count == 0) return;
  int usable = std::max(1, workers);
  usable = static_cast<int>(std::min<std::size_t>(usable, count));
  if (usable == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(usable);
  std::size_t chunk = (count + usable - 1) / usable;
  for (int w = 0; w < usable; ++w) {
    std::size_t lo = w * chunk;
    std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

int default_worker_count();

}  // namespace gemnas
