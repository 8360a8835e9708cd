#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace goalqvi {

/// 0 means "auto": GOALQVI_THREADS if set, otherwise the hardware count.
unsigned resolve_threads(unsigned requested) noexcept;

/// Runs body(i) for i in [begin, end) over contiguous static chunks. Each
/// index is visited exactly once, so results written per index do not
/// depend on the thread count.
template <class Body>
void parallel_for(std::size_t begin, std::size_t end, unsigned threads, Body&& body) {
  const std::size_t count = end > begin ? end - begin : 0;
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1u), count);
  if (workers <= 1) {
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = begin + w * chunk;
    const std::size_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
}

}  // namespace goalqvi
