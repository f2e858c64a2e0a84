#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gslam {

/// Process-wide worker count for the OpenMP kernels. 1 forces the serial path.
void set_thread_count(int n);
int thread_count();

/// Parallel loop over [0, n). The body must only write state owned by
/// iteration i, so results never depend on the schedule.
template <typename F>
void parallel_for(std::ptrdiff_t n, const F& body) {
#ifdef _OPENMP
  if (thread_count() > 1) {
#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    return;
  }
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
}

/// Deterministic parallel sum: fixed-size chunks are accumulated in parallel
/// and combined serially in chunk order, so the floating-point result does not
/// depend on the thread count.
///
/// `Acc` needs a zero-initializing default constructor and `merge(a, b)`.
template <typename Acc, typename ChunkFn, typename MergeFn>
Acc chunked_reduce(std::ptrdiff_t n, std::ptrdiff_t chunk, const ChunkFn& chunk_fn,
                   const MergeFn& merge) {
  if (chunk < 1) chunk = 1;
  const std::ptrdiff_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<Acc> partials(static_cast<size_t>(n_chunks));
  parallel_for(n_chunks, [&](std::ptrdiff_t c) {
    const std::ptrdiff_t lo = c * chunk;
    const std::ptrdiff_t hi = std::min(n, lo + chunk);
    chunk_fn(lo, hi, partials[static_cast<size_t>(c)]);
  });
  Acc total{};
  for (const Acc& p : partials) merge(total, p);
  return total;
}

}  // namespace gslam
