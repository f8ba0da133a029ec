#include "mvsim/summation.hpp"

namespace mvsim {
namespace {

double pairwise(const double* v, std::size_t n, std::size_t stride) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += v[k * stride];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise(v, half, stride) + pairwise(v + half * stride, n - half, stride);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  return pairwise(values.data(), values.size(), 1);
}

double pairwise_sum_strided(const double* values, std::size_t count, std::size_t stride) {
  return pairwise(values, count, stride);
}

}  // namespace mvsim
