#pragma once

#include <cstddef>
#include <functional>

namespace nlfd {

/// Worker count used by parallel_for.  0 (the default) means hardware concurrency.
void set_thread_count(int threads);
int thread_count() noexcept;

/// Calls body(i) for i in [0, n) on up to thread_count() threads.
/// The first exception thrown by any call is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace nlfd
