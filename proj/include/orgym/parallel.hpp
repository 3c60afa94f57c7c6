// OpenMP-backed parallel loop with a serial fallback.
//
// All hot loops in this project are embarrassingly parallel over an index
// (benchmark slots, episodes, scenarios). Each index derives its own RNG
// sub-stream and writes into its own output slot, so the result is
// byte-identical regardless of thread count — the serial path is the
// reference the parallel path is tested against.
#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace orgym {

// Global worker cap. 0 means "use the OpenMP default"; 1 forces the serial
// reference path.
inline int& worker_threads() {
  static int n = 0;
  return n;
}

inline int effective_threads() {
#ifdef _OPENMP
  const int cap = worker_threads();
  return cap > 0 ? cap : omp_get_max_threads();
#else
  return 1;
#endif
}

// Runs fn(i) for i in [0, n). fn must only touch state owned by index i.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
#ifdef _OPENMP
  const int threads = effective_threads();
  if (threads > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      fn(static_cast<std::size_t>(i));
    }
    return;
  }
#endif
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace orgym
