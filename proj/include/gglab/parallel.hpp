#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gglab {

// Thread budget: hardware concurrency capped by the GGLAB_THREADS env var.
inline int max_threads() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("GGLAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) return std::min(hw, cap);
  }
  return hw;
}

// Static block partition of [0, count). fn(begin, end) runs on each worker;
// workers must write to disjoint slots. The first exception thrown by any
// worker is rethrown on the calling thread.
template <typename Fn>
void parallel_for_blocks(std::size_t count, Fn&& fn) {
  const std::size_t threads =
      std::min<std::size_t>(static_cast<std::size_t>(max_threads()), count);
  if (threads <= 1) {
    fn(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const std::size_t chunk = (count + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace gglab
