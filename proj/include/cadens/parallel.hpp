#pragma once

#include <functional>

namespace cadens {

// Run fn(0..n-1), optionally across threads. Work items must be independent
// and write only to their own slots; results are therefore identical to the
// serial order regardless of scheduling.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

int default_thread_count();

}  // namespace cadens
