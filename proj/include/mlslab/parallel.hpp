#pragma once
#include <cstddef>
#include <functional>

namespace mlslab {

// Worker count used by parallel_for. 0 means "not set": falls back to
// MLSLAB_THREADS, then hardware concurrency.
void set_threads(unsigned n);
unsigned threads();

// Runs body(i) for i in [0, n). Items are handed out dynamically but each
// body writes only its own slot, so results never depend on the schedule.
// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mlslab
