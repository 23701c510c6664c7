#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ladder {

/// Worker count for scan-level loops; 0 selects the hardware concurrency.
struct Parallelism {
  unsigned threads = 0;

  unsigned resolved() const {
    if (threads > 0) return threads;
    return std::max(1u, std::thread::hardware_concurrency());
  }
};

/// Calls fn(i) for i in [0, count). Each index is evaluated by exactly one
/// worker and results are expected to be written to per-index slots, so the
/// outcome does not depend on the worker count. If any call throws, the
/// exception from the lowest failing index is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, const Parallelism& par, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(par.resolved(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < count; i += workers) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace ladder
