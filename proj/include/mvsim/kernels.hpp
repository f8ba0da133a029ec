#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

#include "mvsim/coefficient_model.hpp"
#include "mvsim/measure_view.hpp"

// Data-parallel inner loops. Each kernel has a serial reference and an
// OpenMP variant; both perform identical per-element arithmetic, so their
// outputs agree bit for bit for any thread count.
namespace mvsim::kernels {

inline constexpr std::size_t kNoFailure = std::numeric_limits<std::size_t>::max();

/// One Euler-Maruyama step for all particles with the measure frozen in
/// `mu`: out_i = x_i + b(t, x_i, mu) h + sigma(t, x_i, mu) dW_i.
/// `dw` is particle-major (N * q). Returns the lowest particle index whose
/// new state is not finite, or kNoFailure.
std::size_t em_step_serial(const CoefficientModel& model, double t, double h,
                           const EmpiricalMeasureView& mu, std::span<const double> dw,
                           std::span<double> out);
std::size_t em_step_parallel(const CoefficientModel& model, double t, double h,
                             const EmpiricalMeasureView& mu, std::span<const double> dw,
                             std::span<double> out);

/// Fills a particle-major tableau with N(0, h) increments.
void fill_increments_serial(std::uint64_t seed, std::uint32_t replication, std::size_t particles,
                            std::size_t steps, std::size_t noise_dimension, double mesh,
                            std::span<double> out);
void fill_increments_parallel(std::uint64_t seed, std::uint32_t replication,
                              std::size_t particles, std::size_t steps,
                              std::size_t noise_dimension, double mesh, std::span<double> out);

/// Per-coordinate mean and raw second moment of N points in R^d.
void moments_serial(std::span<const double> points, std::size_t dimension, std::span<double> mean,
                    std::span<double> second_moment);
void moments_parallel(std::span<const double> points, std::size_t dimension,
                      std::span<double> mean, std::span<double> second_moment);

}  // namespace mvsim::kernels
