#pragma once

#include <cstddef>
#include <functional>

namespace reinforce {

/// Number of worker threads used by assembly and vector kernels (default 1).
void set_thread_count(int n);
int thread_count() noexcept;

/// Calls body(begin, end) over [0, n) split into fixed-size chunks.
///
/// The chunking depends only on n and `chunk`, never on the thread count,
/// so per-chunk results are reproducible.
void parallel_chunks(std::size_t n, std::size_t chunk, const std::function<void(std::size_t, std::size_t)>& body);

/// Adds chunk_sum(begin, end) over fixed chunks of [0, n), pairwise in chunk order.
double parallel_sum(std::size_t n, const std::function<double(std::size_t, std::size_t)>& chunk_sum);

inline constexpr std::size_t default_chunk = 4096;

} // namespace reinforce
