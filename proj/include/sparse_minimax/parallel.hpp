#pragma once

#include <cstddef>
#include <functional>

namespace sparse_minimax {

/// Runs task(i) for i in [0, count) on up to `threads` workers pulling indices
/// from a shared counter. Tasks must write only to their own output slot; the
/// exception of the smallest failing index is rethrown after all workers join.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

/// Thread count after applying the SPARSE_MINIMAX_THREADS override.
int resolve_threads(int requested);

}  // namespace sparse_minimax
