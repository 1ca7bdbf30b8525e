#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace smoothscale {

// Runs fn(t) for every t in [0, tasks) on up to `workers` threads.  Callers
// write results into disjoint per-task slots and reduce sequentially
// afterwards, so the outcome is identical for any worker count.
inline void parallel_for(std::uint64_t tasks, unsigned workers,
                         const std::function<void(std::uint64_t)>& fn) {
  if (workers <= 1 || tasks <= 1) {
    for (std::uint64_t t = 0; t < tasks; ++t) fn(t);
    return;
  }
  if (workers > tasks) workers = static_cast<unsigned>(tasks);
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto body = [&] {
    constexpr std::uint64_t kChunk = 16;
    while (!failed.load(std::memory_order_relaxed)) {
      const std::uint64_t begin = next.fetch_add(kChunk);
      if (begin >= tasks) return;
      const std::uint64_t end = std::min(begin + kChunk, tasks);
      try {
        for (std::uint64_t t = begin; t < end; ++t) fn(t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace smoothscale
