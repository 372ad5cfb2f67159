#pragma once

#include <cstddef>
#include <functional>

namespace guru {

/// Worker count: the GURU_WORKERS environment variable if it holds a positive
/// integer, otherwise std::thread::hardware_concurrency() (at least 1).
std::size_t default_workers();

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Each index runs
/// exactly once; the first exception thrown is rethrown after all threads join.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace guru
