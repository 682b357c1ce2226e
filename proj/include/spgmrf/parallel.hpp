#pragma once

#include <cstdint>
#include <type_traits>
#include <limits>
#include <span>
#include <vector>

namespace spgmrf {

/// Kernel execution policy. Serial is the reference path kept for testing;
/// both paths must produce bitwise-identical results.
enum class Exec { serial, parallel };

namespace par {

/// Cap worker threads for all parallel kernels (0 restores the default).
void set_max_threads(int n);
int effective_threads();

/// Partial-sum block size. Fixed so the reduction tree does not depend on
/// the thread count.
inline constexpr std::uint64_t kBlockSize = 4096;

namespace detail {
void run_blocks(std::uint64_t nblocks, Exec ex, void* ctx,
                void (*body)(void*, std::uint64_t));
}

/**
 * Deterministic blocked reduction of a dim-component accumulator over
 * indices [0, n). `f(begin, end, acc)` adds the contribution of one index
 * block into acc (dim doubles, zero-initialized). Blocks are summed
 * pairwise in a fixed order, so serial and parallel execution agree bit
 * for bit.
 */
template <class F>
void blocked_accumulate(std::uint64_t n, std::size_t dim, std::span<double> out,
                        F&& f, Exec ex) {
  for (auto& v : out) v = 0.0;
  if (n == 0) return;
  const std::uint64_t nblocks = (n + kBlockSize - 1) / kBlockSize;
  std::vector<double> partial(nblocks * dim, 0.0);

  struct Ctx {
    std::uint64_t n;
    std::size_t dim;
    std::vector<double>* partial;
    std::remove_reference_t<F>* f;
  } ctx{n, dim, &partial, &f};

  detail::run_blocks(nblocks, ex, &ctx, [](void* p, std::uint64_t b) {
    auto& c = *static_cast<Ctx*>(p);
    const std::uint64_t begin = b * kBlockSize;
    const std::uint64_t end = std::min(c.n, begin + kBlockSize);
    (*c.f)(begin, end, c.partial->data() + b * c.dim);
  });

  for (std::uint64_t gap = 1; gap < nblocks; gap *= 2)
    for (std::uint64_t i = 0; i + gap < nblocks; i += 2 * gap)
      for (std::size_t d = 0; d < dim; ++d)
        partial[i * dim + d] += partial[(i + gap) * dim + d];
  for (std::size_t d = 0; d < dim; ++d) out[d] = partial[d];
}

/// Deterministic sum of f(i) over [0, n).
template <class F>
double blocked_sum(std::uint64_t n, F&& f, Exec ex) {
  double out = 0.0;
  blocked_accumulate(
      n, 1, std::span<double>(&out, 1),
      [&f](std::uint64_t begin, std::uint64_t end, double* acc) {
        double s = 0.0;
        for (std::uint64_t i = begin; i < end; ++i) s += f(i);
        acc[0] = s;
      },
      ex);
  return out;
}

/// Max of f(i) over [0, n); exact regardless of split order.
template <class F>
double blocked_max(std::uint64_t n, F&& f, Exec ex) {
  if (n == 0) return -std::numeric_limits<double>::infinity();
  const std::uint64_t nblocks = (n + kBlockSize - 1) / kBlockSize;
  std::vector<double> partial(nblocks, -std::numeric_limits<double>::infinity());

  struct Ctx {
    std::uint64_t n;
    std::vector<double>* partial;
    std::remove_reference_t<F>* f;
  } ctx{n, &partial, &f};

  detail::run_blocks(nblocks, ex, &ctx, [](void* p, std::uint64_t b) {
    auto& c = *static_cast<Ctx*>(p);
    const std::uint64_t begin = b * kBlockSize;
    const std::uint64_t end = std::min(c.n, begin + kBlockSize);
    double m = -std::numeric_limits<double>::infinity();
    for (std::uint64_t i = begin; i < end; ++i) m = std::max(m, (*c.f)(i));
    (*c.partial)[b] = m;
  });

  double m = partial[0];
  for (std::uint64_t b = 1; b < nblocks; ++b) m = std::max(m, partial[b]);
  return m;
}

}  // namespace par
}  // namespace spgmrf
