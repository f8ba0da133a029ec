#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mvsim/time_grid.hpp"

namespace mvsim {

enum class ExecPolicy { kSerial, kParallel };

/// Brownian increments for N particles on a fine grid, materialised in
/// particle-major, step-minor, component-innermost order. Increment
/// (i, j, c) is N(0, h_fine), drawn from the Philox stream keyed by
/// (seed, replication, particle i, step j, component c).
class NoiseTableau {
 public:
  NoiseTableau(std::uint64_t seed, std::uint64_t replication, std::size_t particles,
               std::size_t noise_dimension, TimeGrid fine_grid, std::vector<double> increments);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t replication() const noexcept { return replication_; }
  std::size_t particles() const noexcept { return particles_; }
  std::size_t noise_dimension() const noexcept { return noise_dimension_; }
  const TimeGrid& grid() const noexcept { return grid_; }

  std::span<const double> increments() const noexcept { return increments_; }
  /// The q-vector for particle i over fine step j.
  std::span<const double> increment(std::size_t particle, std::size_t step) const noexcept {
    return std::span<const double>(increments_)
        .subspan((particle * grid_.steps() + step) * noise_dimension_, noise_dimension_);
  }
  /// All increments of particle i (n_fine * q values).
  std::span<const double> path(std::size_t particle) const noexcept {
    return std::span<const double>(increments_)
        .subspan(particle * grid_.steps() * noise_dimension_, grid_.steps() * noise_dimension_);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t replication_;
  std::size_t particles_;
  std::size_t noise_dimension_;
  TimeGrid grid_;
  std::vector<double> increments_;
};

NoiseTableau generate_tableau(std::uint64_t seed, std::uint64_t replication, std::size_t particles,
                              std::size_t noise_dimension, const TimeGrid& fine_grid,
                              ExecPolicy policy = ExecPolicy::kParallel);

/// First `particles` particles of a tableau (streams are keyed per particle,
/// so this equals generating the smaller tableau directly).
NoiseTableau truncate_particles(const NoiseTableau& tableau, std::size_t particles);

/// Per-step increments on a coarse grid, laid out step-major
/// ([step][particle][component]) for the time-stepping kernels.
struct CoarseIncrements {
  TimeGrid grid;
  std::size_t particles;
  std::size_t noise_dimension;
  std::vector<double> values;

  std::span<const double> step(std::size_t j) const noexcept {
    const std::size_t stride = particles * noise_dimension;
    return std::span<const double>(values).subspan(j * stride, stride);
  }
  double at(std::size_t j, std::size_t particle, std::size_t component) const noexcept {
    return values[(j * particles + particle) * noise_dimension + component];
  }
};

/// Sums the fine increments inside each coarse interval (left to right).
/// Throws DomainError unless coarse n divides n_fine over the same horizon.
CoarseIncrements coarsen(const NoiseTableau& tableau, const TimeGrid& coarse_grid);
/// Same, restricted to the first `particles` particles.
CoarseIncrements coarsen(const NoiseTableau& tableau, const TimeGrid& coarse_grid,
                         std::size_t particles);

/// Standard normals for the initial condition, from the stream keyed
/// (seed, replication, particle, "init"); independent of every grid.
std::vector<double> initial_normals(std::uint64_t seed, std::uint64_t replication,
                                    std::size_t particles, std::size_t dimension);

/// Binary dump: six little-endian 64-bit header fields (seed, replication,
/// N, q, n_fine as unsigned integers; T as an IEEE double) followed by the
/// increments as little-endian doubles in tableau order.
void write_tableau(const NoiseTableau& tableau, const std::filesystem::path& path);
NoiseTableau read_tableau(const std::filesystem::path& path);

}  // namespace mvsim
