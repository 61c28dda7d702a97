#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace dhsqr {

// Runs fn(i) for i in [0, count) across at most `threads` std::threads.
// Each index writes only its own output slot, so results are deterministic
// regardless of scheduling. threads <= 1 degenerates to a plain loop.
inline void parallel_for(long count, int threads, const std::function<void(long)>& fn) {
  if (count <= 0) return;
  if (threads <= 1 || count == 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  const int n_workers = static_cast<int>(std::min<long>(threads, count));
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const long i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

// Pool size from DHSQR_THREADS, else hardware_concurrency, floored at 1.
inline int default_thread_count() {
  if (const char* env = std::getenv("DHSQR_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace dhsqr
