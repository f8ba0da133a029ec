#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mvsim {

/// Finitely supported probability measure: M weighted points in R^d.
class DiscreteMeasure {
 public:
  /// Throws DomainError unless weights are nonnegative and sum to 1
  /// within 1e-12.
  DiscreteMeasure(std::vector<double> points, std::vector<double> weights, std::size_t dimension);

  static DiscreteMeasure uniform(std::vector<double> points, std::size_t dimension);

  std::size_t size() const noexcept { return weights_.size(); }
  std::size_t dimension() const noexcept { return dimension_; }
  std::span<const double> points() const noexcept { return points_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> point(std::size_t k) const noexcept {
    return std::span<const double>(points_).subspan(k * dimension_, dimension_);
  }
  bool is_uniform() const noexcept;

 private:
  std::vector<double> points_;
  std::vector<double> weights_;
  std::size_t dimension_;
};

/// sum_k w_k |x_k|^p, i.e. M_p(mu)^p.
double moment(const DiscreteMeasure& mu, double p);

/// Exact W_p on the line via the quantile coupling. Throws DomainError
/// unless both measures are one-dimensional and p >= 1.
double wasserstein_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p);

/// Largest M accepted by wasserstein_exact.
inline constexpr std::size_t kExactTransportCap = 4096;

/// Exact W_p between equal-size uniform measures via optimal assignment on
/// |x_i - y_j|^p. Throws DomainError for unequal sizes or non-uniform
/// weights and CapacityError above kExactTransportCap.
double wasserstein_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p);

/// Sliced W_p: root-mean of exact 1-D W_p^p over `projections` random unit
/// directions drawn from `seed`. An approximation of W_p when d > 1.
double wasserstein_sliced(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                          std::size_t projections, std::uint64_t seed);

/// Exact W_2 between a 1-D discrete measure and N(mean, variance), by
/// integrating the quantile gap atom by atom in closed form.
double w2_to_gaussian(const DiscreteMeasure& mu, double mean, double variance);

/// Exact W_1 between a 1-D discrete measure and N(mean, variance).
double w1_to_gaussian(const DiscreteMeasure& mu, double mean, double variance);

/// Fast paths on raw 1-D samples with uniform weights (sorted internally).
double w2_squared_to_gaussian_samples(std::span<const double> samples, double mean,
                                      double variance);
double w1_to_gaussian_samples(std::span<const double> samples, double mean, double variance);

}  // namespace mvsim
