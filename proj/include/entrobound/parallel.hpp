#pragma once

#include <cstddef>
#include <functional>

namespace entrobound {

/// Worker count: set_thread_count() if called, else ENTROBOUND_THREADS, else hardware concurrency.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs fn(begin, end) over contiguous chunks of [0, n); exceptions are rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace entrobound
