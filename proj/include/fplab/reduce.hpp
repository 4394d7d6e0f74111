#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace fplab {

/// Pairwise (tree) summation in fixed index order. The result depends only on
/// the input sequence, never on how the caller partitioned the work.
double pairwise_sum(std::span<const double> values);

/// Runs body(begin, end) over contiguous chunks of [0, count) on `workers`
/// threads. Chunk boundaries affect only scheduling; callers write results to
/// disjoint slots so the outcome is independent of the worker count.
void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t, std::size_t)>& body);

/// Worker count meaning "all available cores".
int hardware_workers();

}  // namespace fplab
