#pragma once

#include <cstddef>
#include <functional>

namespace corrbound {

/// Number of hardware threads, at least 1.
std::size_t default_jobs();

/// Runs body(i) for i in [0, count) on up to `jobs` worker threads.
/// Work items must write only to their own output slot; the first exception
/// thrown by any item is rethrown on the calling thread after all workers
/// have stopped. jobs == 0 means default_jobs().
void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& body);

}  // namespace corrbound
