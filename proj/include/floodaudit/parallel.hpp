#pragma once

// Static block-partitioned parallel loop. Work items must be
// independent; combined with counter-seeded RNG streams this keeps
// results identical for any worker count.

#include <cstddef>
#include <thread>
#include <vector>

namespace floodaudit {

template <typename Fn>
void parallel_for(std::size_t begin, std::size_t end, std::size_t threads, Fn&& fn) {
  std::size_t count = end > begin ? end - begin : 0;
  if (count == 0) return;
  if (threads == 0) threads = std::thread::hardware_concurrency();
  if (threads <= 1 || count == 1) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
    return;
  }
  if (threads > count) threads = count;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::size_t chunk = count / threads;
  std::size_t rem = count % threads;
  std::size_t at = begin;
  for (std::size_t t = 0; t < threads; ++t) {
    std::size_t len = chunk + (t < rem ? 1 : 0);
    std::size_t lo = at, hi = at + len;
    at = hi;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace floodaudit
