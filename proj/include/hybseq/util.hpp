#pragma once

#include <cstddef>
#include <functional>

namespace hybseq {

/// Global worker cap (CLI --threads). 0 = hardware concurrency.
void set_thread_cap(int threads);
int effective_threads();

/// Static partition of [0, n) across the effective worker count; each index
/// is processed exactly once, so writes to pre-indexed slots stay
/// deterministic regardless of the thread count.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

}  // namespace hybseq
