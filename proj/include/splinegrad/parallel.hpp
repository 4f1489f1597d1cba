#pragma once

#include <cstddef>
#include <functional>

namespace splinegrad {

/// Global worker count used by the data-parallel loops. Defaults to 1 so
/// results are bit-reproducible unless the caller opts in to more threads.
int num_threads();
void set_num_threads(int n);

/// Splits [0, count) into one contiguous chunk per worker and runs
/// fn(chunk_index, begin, end) on each. Chunk boundaries depend only on
/// (count, num_threads()), so per-chunk partial results can be merged in
/// chunk order deterministically.
void parallel_chunks(std::size_t count,
                     const std::function<void(int, std::size_t, std::size_t)>& fn);

}  // namespace splinegrad
