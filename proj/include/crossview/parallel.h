// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_PARALLEL_H_
#define CROSSVIEW_PARALLEL_H_

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace crossview {

// Worker count: CROSSVIEW_THREADS if set, else hardware concurrency.
inline int ThreadBudget() {
  if (const char* env = std::getenv("CROSSVIEW_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, n). Each index writes only its own slot, so the
// result does not depend on the thread count.
inline void ParallelFor(int n, const std::function<void(int)>& fn,
                        int threads = ThreadBudget()) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += threads) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace crossview

#endif  // CROSSVIEW_PARALLEL_H_
