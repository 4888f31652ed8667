#ifndef SUDAP_PARALLEL_HPP
#define SUDAP_PARALLEL_HPP

#include <Eigen/Core>

namespace sudap {

// Worker cap for column-parallel kernels. 0 selects the OpenMP default.
void set_num_threads(int n);
int num_threads();

// Columns are always split at the same boundaries, whatever the thread
// count, so per-chunk reductions combine in a fixed order.
inline constexpr Eigen::Index kColumnChunk = 256;

inline Eigen::Index chunk_count(Eigen::Index n) { return (n + kColumnChunk - 1) / kColumnChunk; }

// Calls fn(chunk, first_column, column_count) for every chunk of [0, n).
template <typename Fn>
void for_each_chunk(Eigen::Index n, Fn&& fn) {
  const Eigen::Index chunks = chunk_count(n);
  const int threads = num_threads();
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1 && chunks > 1)
  for (Eigen::Index k = 0; k < chunks; ++k) {
    const Eigen::Index first = k * kColumnChunk;
    const Eigen::Index count = first + kColumnChunk <= n ? kColumnChunk : n - first;
    fn(k, first, count);
  }
}

}  // namespace sudap

#endif  // SUDAP_PARALLEL_HPP
