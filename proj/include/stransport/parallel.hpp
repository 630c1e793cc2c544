#pragma once

#include <cstddef>
#include <functional>

namespace stransport {

/// Worker count: hardware concurrency, capped by STRANSPORT_THREADS.
unsigned worker_count();

/// Runs body(k) for k in [0, n). Each index is handled by exactly one
/// worker; callers write results to disjoint slots and reduce in index
/// order, so results never depend on the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace stransport
