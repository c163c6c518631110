#pragma once

#include <cstddef>
#include <functional>

namespace squarepack {

// Worker count: explicit request if positive, else SQUAREPACK_THREADS, else hardware concurrency.
int resolve_threads(int requested);

// Runs task(i) for i in [0, n) on up to `threads` workers. Tasks are claimed in index order;
// callers that write results by index get output independent of the worker count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& task);

}  // namespace squarepack
