#pragma once

#include <cstddef>
#include <functional>

namespace apparatus {

/// Worker count used by the data-parallel kernels and the sweep pool.
/// Defaults to 1; the CLI sets it from --threads / APPARATUS_THREADS.
unsigned thread_count();
void set_thread_count(unsigned n);

/// Splits [0, n) into contiguous chunks and runs body(begin, end) on up to
/// thread_count() threads. Chunks write disjoint outputs, so results do not
/// depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace apparatus
