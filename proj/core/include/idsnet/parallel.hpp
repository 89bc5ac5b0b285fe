#pragma once

#include <cstddef>
#include <functional>

namespace idsnet {

// Process-wide cap on worker threads used inside kernels. 1 means everything
// runs on the calling thread.
void set_max_threads(std::size_t n);
std::size_t max_threads();

// Splits [0, n) into contiguous chunks, one per worker, and calls
// fn(begin, end) for each. Chunk boundaries depend only on n and the thread
// cap, so any computation that writes disjoint outputs per index is
// bitwise identical regardless of scheduling. Work below `min_grain`
// indices per worker stays on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                  std::size_t min_grain = 1);

}  // namespace idsnet
