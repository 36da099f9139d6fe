#pragma once

#include <cstddef>
#include <functional>

namespace genuq {

// Runs fn(i) for i in [0, n) across at most `workers` threads. Work items
// must be independent; each writes only its own output slot, so the result
// is identical for any worker count. The first exception thrown by any
// item is rethrown on the calling thread after all workers join.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

// Worker-count resolution: explicit > 0 wins; otherwise the GENAI4UQ_THREADS
// environment variable; otherwise hardware concurrency.
int resolve_threads(int requested);

}  // namespace genuq
