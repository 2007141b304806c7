#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace roughtail {

inline int default_threads() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

inline int resolve_threads(int requested) {
  return requested <= 0 ? default_threads() : requested;
}

/// Static-partition parallel loop exposing the worker id, for loops that need
/// per-worker scratch state. Workers own disjoint index ranges and must write
/// only to per-index slots; reductions happen after the join, so results do
/// not depend on the worker count.
inline void parallel_for_indexed(std::int64_t n, int threads,
                                 const std::function<void(int, std::int64_t)>& fn) {
  threads = resolve_threads(threads);
  if (threads <= 1 || n < 2) {
    for (std::int64_t i = 0; i < n; ++i) fn(0, i);
    return;
  }
  const int workers = static_cast<int>(std::min<std::int64_t>(threads, n));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const std::int64_t lo = n * w / workers;
    const std::int64_t hi = n * (w + 1) / workers;
    pool.emplace_back([&, lo, hi, w] {
      try {
        for (std::int64_t i = lo; i < hi; ++i) fn(w, i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& fn) {
  parallel_for_indexed(n, threads, [&fn](int, std::int64_t i) { fn(i); });
}

}  // namespace roughtail
