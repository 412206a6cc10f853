#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fairaudit {

/// Global worker cap set once by the CLI (--threads / FAIRAUDIT_THREADS).
int thread_cap();
void set_thread_cap(int n);

/// Runs fn(i) for i in [0, n). Each index must write only to its own output
/// slot; results are then independent of the thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, int threads = 0) {
  if (threads <= 0) threads = thread_cap();
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex err_mu;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fairaudit
