#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace hjsafe {

/// Number of workers to use: explicit request, or hardware concurrency when 0.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Data-parallel map over [begin, end). Indices are handed out through an
/// atomic cursor; each index is processed by exactly one worker as a pure
/// function of shared read-only inputs, so results are identical for any
/// thread count. Callers pass coarse work items (e.g. node chunks), not
/// individual cheap elements.
template <typename Fn>
void parallel_for(std::size_t begin, std::size_t end, unsigned threads, Fn&& fn) {
  const std::size_t count = end > begin ? end - begin : 0;
  if (count == 0) return;
  const unsigned workers = resolve_threads(threads);
  if (workers <= 1 || count == 1) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> cursor{begin};
  auto body = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1, std::memory_order_relaxed);
      if (i >= end) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
}

}  // namespace hjsafe
