#pragma once

#include <cstddef>
#include <functional>

namespace damo {

/// Worker count: DAMO_THREADS if set to a positive integer, else hardware concurrency.
std::size_t worker_count();

/// Runs task(i) for i in [0, count) on up to `workers` threads. Tasks are
/// claimed in index order; the first exception thrown is rethrown after all
/// workers join.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& task);

} // namespace damo
