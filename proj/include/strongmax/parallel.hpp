#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace strongmax {

namespace detail {
inline std::atomic<unsigned>& thread_override() {
  static std::atomic<unsigned> value{0};
  return value;
}
}  // namespace detail

/// Worker count used by the parallel kernels.
///
/// An explicit set_thread_count() wins; otherwise STRONGMAX_THREADS caps the
/// hardware concurrency. Results never depend on this number: every parallel
/// loop writes disjoint outputs or combines with max.
inline unsigned thread_count() {
  if (unsigned forced = detail::thread_override().load(); forced > 0) return forced;
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("STRONGMAX_THREADS")) {
    try {
      long cap = std::stol(env);
      if (cap >= 1) return static_cast<unsigned>(cap);
    } catch (...) {
    }
  }
  return hw;
}

/// Overrides the worker count; 0 restores the environment/hardware default.
inline void set_thread_count(unsigned n) { detail::thread_override().store(n); }

/// Runs body(worker, begin, end) on contiguous chunks of [0, count).
/// Exceptions from workers are rethrown on the calling thread.
template <class Body>
void parallel_chunks(std::size_t count, Body&& body) {
  if (count == 0) return;
  unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), count));
  if (workers <= 1) {
    body(0u, std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::size_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t begin = w * chunk;
    std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, w, begin, end] {
      try {
        body(w, begin, end);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Calls fn(i) for every i in [0, count).
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  parallel_chunks(count, [&](unsigned, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
  });
}

/// Pairwise (cascade) summation with a fixed split order, so the result is a
/// function of the input sequence alone.
inline double pairwise_sum(std::span<const double> xs) {
  constexpr std::size_t kBlock = 32;
  if (xs.size() <= kBlock) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

}  // namespace strongmax
