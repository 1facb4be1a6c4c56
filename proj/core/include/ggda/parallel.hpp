#pragma once

#include <cstddef>
#include <functional>

namespace ggda {

/// Worker cap: GGDA_THREADS if set and positive, else hardware concurrency.
int worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. The first
/// exception thrown by any job is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ggda
