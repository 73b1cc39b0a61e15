#pragma once

#include <cstddef>
#include <functional>

namespace convlab {

// Worker count: hardware concurrency, capped by CONVLAB_THREADS when set.
std::size_t worker_count();

// Runs body(i) for i in [0, count). Each index is an independent work unit;
// callers write results into per-index slots so output is schedule-independent.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace convlab
