#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace reflect {

// Runs body(i) for i in [0, n) across OpenMP threads. Each index must write
// only its own output slot; reductions happen afterwards, in index order, so
// results do not depend on the thread count. The exception thrown at the
// lowest index is rethrown on the calling thread, as serial_for would.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  std::exception_ptr error;
  long long error_index = -1;
  std::mutex error_mutex;
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (error_index < 0 || i < error_index) {
        error = std::current_exception();
        error_index = i;
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

template <class Body>
void serial_for(std::size_t n, Body&& body) {
  for (std::size_t i = 0; i < n; ++i) body(i);
}

int max_threads();

}  // namespace reflect
