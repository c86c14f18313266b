#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fvd {

/// Runs fn(i) for i in [0, n) over `workers` threads in contiguous chunks.
/// fn must only touch per-index state. The first exception thrown by any
/// worker is rethrown on the calling thread.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  const std::size_t w = std::max<std::size_t>(
      1, std::min<std::size_t>(workers, n == 0 ? 1 : n));
  if (w == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> threads;
    threads.reserve(w);
    const std::size_t chunk = (n + w - 1) / w;
    for (std::size_t k = 0; k < w; ++k) {
      const std::size_t begin = k * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin >= end) break;
      threads.emplace_back([&, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace fvd
