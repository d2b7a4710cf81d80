#pragma once

#include <cstddef>
#include <functional>

namespace scd {

/// Worker cap shared by the per-player prox fan-out and the bench harness.
/// Reads SCD_THREADS, defaulting to the hardware concurrency.
int worker_count();

/// Runs fn(i) for i in [0, n). Tasks must write only to disjoint slots; the
/// result is then deterministic regardless of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace scd
