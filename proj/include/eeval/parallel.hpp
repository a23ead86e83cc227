#pragma once

#include <cstddef>
#include <functional>

namespace eeval {

// Worker cap: EEVAL_THREADS when set to a positive value, otherwise the
// hardware concurrency. 0 also means auto.
int worker_count();

// Runs fn(i) for i in [0, n) across up to worker_count() threads. Results
// must be written to per-index slots so the schedule cannot affect them.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace eeval
