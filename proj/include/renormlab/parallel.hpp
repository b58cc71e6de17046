#ifndef RENORMLAB_PARALLEL_HPP
#define RENORMLAB_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace renormlab {

/// Run fn(i) for i in [0, n) on a fixed pool of worker threads. Each index is
/// written by exactly one worker, so results stored by index are deterministic.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
}

}  // namespace renormlab

#endif  // RENORMLAB_PARALLEL_HPP
