#pragma once

#include <cstddef>
#include <functional>

namespace pacsnoc {

/// Worker count: hardware concurrency, capped by PACSNOC_THREADS when set.
std::size_t thread_count();

/// Runs fn(i) for i in [0, n). Each index is handled by exactly one worker;
/// callers write results to per-index slots and reduce in index order, so
/// results do not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace pacsnoc
