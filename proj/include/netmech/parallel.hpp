#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace netmech {

// Runs fn(0), .., fn(n-1) on a worker pool (threads = 0 picks a hardware
// count). Work items must only write their own output slots, which keeps
// results independent of the thread count. The first exception thrown by a
// worker is rethrown after all workers drain.
inline void run_samples(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
  }
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int s = 0; s < n; ++s) fn(s);
    return;
  }
  std::atomic<int> cursor{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const int s = cursor.fetch_add(1);
      if (s >= n) return;
      try {
        fn(s);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace netmech
