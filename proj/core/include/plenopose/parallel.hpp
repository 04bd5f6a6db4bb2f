#pragma once

#include <cstddef>
#include <functional>

namespace plenopose {

/// Global worker-thread cap. 0 means "use hardware concurrency".
void set_thread_budget(int n);
int thread_budget();

/// Runs fn(i) for i in [0, n) on up to thread_budget() threads with static
/// block partitioning. Each index must only touch its own output slots, so
/// results are identical for every thread count.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

}  // namespace plenopose
