#ifndef RMX_PARALLEL_HPP_
#define RMX_PARALLEL_HPP_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rmx {

/// Evaluates fn(0), ..., fn(count - 1) on up to `workers` threads and returns
/// the results in index order. Work is handed out dynamically, but since every
/// result is stored at its own index the output does not depend on scheduling.
/// The first exception thrown by any call is rethrown after all threads join.
template <class Fn>
auto parallel_map(std::size_t count, unsigned workers, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<R> out(count);
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  const std::size_t nthreads = std::min<std::size_t>(workers, count);
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

/// Default worker count: the hardware concurrency, at least 1.
inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace rmx

#endif  // RMX_PARALLEL_HPP_
