#pragma once

#include <algorithm>
#include <thread>
#include <vector>

#include "core/types.hpp"

namespace patchdb {

/// Resolve a requested worker count: values >= 1 are taken as-is
/// (oversubscription is allowed), anything else means "auto".
int resolve_threads(int requested);

/// Run fn(begin, end) over [0, n) split into contiguous ascending chunks.
///
/// Callers must only write to per-index slots inside fn; reductions that
/// depend on summation order have to happen afterwards in index order.
/// Under that discipline results are bit-identical for any worker count.
template <typename F>
void parallel_for(Index n, int threads, F&& fn) {
  if (n <= 0) return;
  Index workers = std::min<Index>(std::max(threads, 1), n);
  if (workers <= 1) {
    fn(Index{0}, n);
    return;
  }
  const Index chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (Index t = 0; t < workers; ++t) {
    const Index b = std::min(t * chunk, n);
    const Index e = std::min(b + chunk, n);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace patchdb
