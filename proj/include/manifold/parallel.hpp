#pragma once

#include "manifold/types.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace manifold {

/// Resolves a worker count; 0 means one worker per hardware thread.
inline int resolve_workers(int workers) {
  if (workers > 0) return workers;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Runs body(i) for i in [0, n) over contiguous static chunks.
/// Each index is visited exactly once, so callers writing to slot i get
/// results that do not depend on the worker count. If bodies throw, the
/// exception from the lowest failing index is rethrown.
template <typename Body>
void parallel_for(Index n, int workers, Body&& body) {
  const int w = static_cast<int>(std::min<Index>(resolve_workers(workers), std::max<Index>(n, 1)));
  if (w <= 1 || n < 2) {
    for (Index i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  Index failed_at = n;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  const Index chunk = (n + w - 1) / w;
  for (int t = 0; t < w; ++t) {
    const Index begin = t * chunk;
    const Index end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      Index i = begin;
      try {
        for (; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace manifold
