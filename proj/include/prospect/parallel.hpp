#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace prospect {

// Runs fn(i) for i in [begin, end). Work items must be independent and own
// their RNG substreams so the result matches sequential execution.
inline void parallel_for(int begin, int end, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || end - begin <= 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const int count = std::min(threads, end - begin);
  std::atomic<int> next{begin};
  for (int t = 0; t < count; ++t)
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= end) return;
        fn(i);
      }
    });
  for (auto& th : pool) th.join();
}

}  // namespace prospect
