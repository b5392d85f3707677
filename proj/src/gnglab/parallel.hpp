#pragma once

#include <cstddef>
#include <functional>

namespace gnglab {

/// Worker cap for data-parallel loops. Zero means "not set": fall back to
/// GNGLAB_THREADS, then to the hardware concurrency.
void set_thread_count(int n);
int thread_count();

/// Runs fn(i) for i in [0, n). Each index is written by exactly one worker,
/// so results stored by index are deterministic. The first exception thrown
/// (lowest index) is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace gnglab
