#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qp {

// Worker count from QPLAB_THREADS (default 1).
inline unsigned thread_count() {
  if (const char* s = std::getenv("QPLAB_THREADS")) {
    const long n = std::strtol(s, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return 1;
}

// f(i) for i in [0, n). Each index is handled exactly once, so results written
// to slot i are independent of scheduling. The first exception is rethrown.
template <typename F>
void parallel_for(std::size_t n, F&& f) {
  const unsigned t = std::min<std::size_t>(thread_count(), n ? n : 1);
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < t; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

} // namespace qp
