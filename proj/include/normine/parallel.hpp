#ifndef NORMINE_PARALLEL_HPP
#define NORMINE_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace normine {

// Static fork-join split of [0, n) into at most `workers` contiguous ranges.
// fn(begin, end) runs once per range; the caller must make ranges
// independent.  Exceptions are captured and the first one rethrown after
// the join, so a worker failure cannot tear down the process.
template <typename Fn>
void parallel_ranges(std::size_t n, int workers, Fn&& fn) {
  if (n == 0) return;
  std::size_t w = workers < 1 ? 1 : static_cast<std::size_t>(workers);
  w = std::min(w, n);
  if (w == 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(w);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const std::size_t chunk = (n + w - 1) / w;
  for (std::size_t t = 0; t < w; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline int default_workers() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace normine

#endif
