#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace fttm::parallel {

// Caps the OpenMP team at FTTM_THREADS (if set and below the default). Called once by
// the CLI; library code never changes the thread count on its own.
void configure_from_env();

int max_threads();
void set_max_threads(int n);

// Runs fn(i) for i in [0, n) across the OpenMP team. Results must be written
// to per-index slots so the outcome does not depend on scheduling. The first
// exception thrown by any iteration is rethrown after the loop.
template <class Fn>
void for_each_index(std::size_t n, Fn&& fn) {
  std::exception_ptr error;
  std::mutex m;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(m);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace fttm::parallel
