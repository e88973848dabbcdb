#pragma once

#include <cstdint>
#include <functional>

namespace deflect {

// Upper bound on worker threads used by parallel_for.  Default 1.
// Thread count must never change computed results: parallel loops write
// disjoint ranges and all reductions are performed serially.
void set_max_threads(int n);
int max_threads();

// Runs fn(begin, end) over a static partition of [begin, end) into
// contiguous chunks, one per worker.  Falls back to a plain call when a
// single worker suffices.  fn must only write locations owned by its range.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace deflect
