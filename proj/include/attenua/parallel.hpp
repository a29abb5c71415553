#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace attenua {

// Process-wide worker count used by the stencil kernels and the ray sampler.
inline std::atomic<int>& thread_count() {
  static std::atomic<int> n{1};
  return n;
}

inline void set_thread_count(int n) { thread_count() = std::max(1, n); }

// Calls fn(i) for every i in [0, n). Work is split into contiguous blocks, one
// per worker. Callers that reduce must write per-index partials and combine
// them in index order afterwards, so results do not depend on the worker count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(thread_count().load()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t block = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * block;
    const std::size_t hi = std::min(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
}

// Sum of per-index partials in index order.
template <class Fn>
double ordered_sum(std::size_t n, Fn&& partial) {
  std::vector<double> parts(n, 0.0);
  parallel_for(n, [&](std::size_t i) { parts[i] = partial(i); });
  double s = 0.0;
  for (double p : parts) s += p;
  return s;
}

}  // namespace attenua
