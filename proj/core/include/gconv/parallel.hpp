#pragma once

#include <cstddef>
#include <functional>

namespace gconv {

/// Worker count: GCONV_THREADS when set (clamped to [1, 256]), otherwise the
/// hardware concurrency, otherwise 1.
int worker_count();

/// Runs fn(i) for i in [0, n). Work items must be independent and write only
/// their own slots, so results are bitwise identical for any worker count.
/// Runs inline when n is small or one worker is configured.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace gconv
