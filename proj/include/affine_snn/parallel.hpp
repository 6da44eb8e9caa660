#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace affine_snn {

// Worker count: AFFINE_SNN_THREADS if set to a positive integer, otherwise
// the hardware concurrency.
inline std::size_t default_thread_count() {
  if (const char* env = std::getenv("AFFINE_SNN_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// Runs fn(task) for task in [0, tasks). Tasks are assigned statically; the
// caller reduces per-task results in task order, so the outcome does not
// depend on the thread count.
template <typename Fn>
void parallel_tasks(std::size_t tasks, std::size_t threads, Fn&& fn) {
  threads = std::min(std::max<std::size_t>(threads, 1), tasks);
  if (threads <= 1) {
    for (std::size_t t = 0; t < tasks; ++t) fn(t);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t t = w; t < tasks; t += threads) fn(t);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace affine_snn
