#pragma once

#include <cstddef>
#include <functional>

namespace caputo_ms {

// requested > 0 wins, then CAPUTO_MS_WORKERS, then hardware concurrency.
std::size_t resolve_workers(std::size_t requested = 0);

// Runs fn(task, worker) for every task in [0, count). Tasks are claimed in
// increasing order; if any throw, the exception of the lowest task index is
// rethrown after all workers have joined.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t task, std::size_t worker)>& fn);

}  // namespace caputo_ms
