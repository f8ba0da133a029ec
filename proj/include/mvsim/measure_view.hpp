#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mvsim {

/// Read-only view of the empirical measure (1/N) sum_i delta_{x_i} of N
/// points in R^d (row-major, point-contiguous). The per-coordinate mean and
/// raw second moment are computed once at construction.
///
/// The view does not own the points; it must not outlive them.
class EmpiricalMeasureView {
 public:
  EmpiricalMeasureView(std::span<const double> points, std::size_t dimension);

  std::size_t size() const noexcept { return size_; }
  std::size_t dimension() const noexcept { return dimension_; }
  double weight() const noexcept { return 1.0 / static_cast<double>(size_); }

  std::span<const double> points() const noexcept { return points_; }
  std::span<const double> point(std::size_t i) const noexcept {
    return points_.subspan(i * dimension_, dimension_);
  }

  std::span<const double> mean() const noexcept { return mean_; }
  std::span<const double> second_moment() const noexcept { return second_moment_; }

 private:
  std::span<const double> points_;
  std::size_t dimension_;
  std::size_t size_;
  std::vector<double> mean_;
  std::vector<double> second_moment_;
};

}  // namespace mvsim
