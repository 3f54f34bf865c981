#pragma once

#include <cstdint>
#include <functional>

namespace bt {

/// Worker count: BT_THREADS if set and positive, else hardware concurrency,
/// never more than `cap` when cap > 0.
unsigned worker_count(unsigned cap = 0);

/// Runs body(i) for i in [0, n) on up to `threads` workers. Indices are handed
/// out dynamically; the body must only write to per-index storage. The first
/// exception thrown by any body is rethrown after all workers stop.
void parallel_for(std::int64_t n, unsigned threads, const std::function<void(std::int64_t)>& body);

}  // namespace bt
