#pragma once

#include <cstddef>
#include <functional>

namespace csfbench {

/// Worker count: CSFBENCH_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Calls body(i) for i in [0, n) across worker threads. body must only write
/// to per-index state.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace csfbench
