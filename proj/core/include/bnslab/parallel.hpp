#pragma once

#include <cstddef>
#include <functional>

namespace bnslab {

/// Worker count: BNSLAB_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int worker_count();

/// Runs task(k) for k in [0, n_tasks) on up to worker_count() threads.
/// Tasks are claimed in order; callers write results by task index so the
/// outcome does not depend on scheduling. The first exception thrown by any
/// task (lowest task index) is rethrown after all workers finish.
void parallel_for(std::size_t n_tasks, const std::function<void(std::size_t)>& task);

}  // namespace bnslab
