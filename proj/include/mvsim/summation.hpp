#pragma once

#include <cstddef>
#include <span>

namespace mvsim {

/// Pairwise (cascade) summation. The reduction tree depends only on the
/// input length, so the result is reproducible bit for bit.
double pairwise_sum(std::span<const double> values);

/// Pairwise sum of a strided sequence values[offset + k * stride], k < count.
double pairwise_sum_strided(const double* values, std::size_t count, std::size_t stride);

}  // namespace mvsim
