#pragma once

#include <functional>

namespace kdimer {

// Worker count used when a caller passes workers <= 0.
int default_workers();

// Runs fn(i) for i in [0, n) on at most `workers` threads. Items are claimed
// in index order from a shared counter. fn must not throw; callers record
// per-item failures themselves.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace kdimer
