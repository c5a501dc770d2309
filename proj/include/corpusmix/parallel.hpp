#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace corpusmix {

// Worker count: CORPUSMIX_THREADS when set and positive, otherwise the
// hardware concurrency.
std::size_t thread_count();

// Calls body(begin, end) over contiguous chunks of [0, n). Each chunk is
// owned by exactly one worker, so writes to per-index slots need no locking.
template <typename Body>
void parallel_chunks(std::size_t n, Body body, std::size_t min_chunk = 1024) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min(thread_count(), (n + min_chunk - 1) / min_chunk));
  if (workers <= 1) {
    body(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace corpusmix
