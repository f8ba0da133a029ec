#include "mvsim/measure_view.hpp"

#include "mvsim/error.hpp"
#include "mvsim/kernels.hpp"

namespace mvsim {

EmpiricalMeasureView::EmpiricalMeasureView(std::span<const double> points, std::size_t dimension)
    : points_(points), dimension_(dimension), size_(0) {
  if (dimension == 0) throw DomainError("empirical measure: dimension must be positive");
  if (points.empty() || points.size() % dimension != 0) {
    throw DomainError("empirical measure: need a nonempty whole number of points");
  }
  size_ = points.size() / dimension;
  mean_.assign(dimension, 0.0);
  second_moment_.assign(dimension, 0.0);
  kernels::moments_parallel(points_, dimension_, mean_, second_moment_);
}

}  // namespace mvsim
