#include "spgmrf/parallel.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spgmrf::par {

namespace {
std::atomic<int> g_max_threads{0};
}

void set_max_threads(int n) {
  g_max_threads.store(n < 0 ? 0 : n);
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#endif
}

int effective_threads() {
  const int cap = g_max_threads.load();
#ifdef _OPENMP
  const int hw = omp_get_max_threads();
  return cap > 0 ? std::min(cap, hw) : hw;
#else
  return cap > 0 ? 1 : 1;
#endif
}

namespace detail {

void run_blocks(std::uint64_t nblocks, Exec ex, void* ctx,
                void (*body)(void*, std::uint64_t)) {
  if (ex == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(nblocks); ++b)
      body(ctx, static_cast<std::uint64_t>(b));
    return;
#endif
  }
  for (std::uint64_t b = 0; b < nblocks; ++b) body(ctx, b);
}

}  // namespace detail
}  // namespace spgmrf::par
