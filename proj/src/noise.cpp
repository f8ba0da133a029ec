#include "mvsim/noise.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "binary_io.hpp"
#include "mvsim/error.hpp"
#include "mvsim/kernels.hpp"
#include "mvsim/philox.hpp"

namespace mvsim {
namespace {

constexpr std::uint64_t kMaxCounterWord = std::numeric_limits<std::uint32_t>::max();

void check_stream_limits(std::uint64_t replication, std::size_t particles, std::size_t steps,
                         std::size_t noise_dimension) {
  if (particles == 0) throw DomainError("noise: particle count must be positive");
  if (steps == 0) throw DomainError("noise: step count must be positive");
  if (noise_dimension == 0) throw DomainError("noise: noise dimension must be positive");
  if (replication > kMaxCounterWord || particles > kMaxCounterWord ||
      steps / 2 > kMaxCounterWord || noise_dimension > 0xFFFF) {
    throw DomainError("noise: coordinates exceed the counter layout");
  }
}

}  // namespace

NoiseTableau::NoiseTableau(std::uint64_t seed, std::uint64_t replication, std::size_t particles,
                           std::size_t noise_dimension, TimeGrid fine_grid,
                           std::vector<double> increments)
    : seed_(seed),
      replication_(replication),
      particles_(particles),
      noise_dimension_(noise_dimension),
      grid_(fine_grid),
      increments_(std::move(increments)) {
  check_stream_limits(replication, particles, grid_.steps(), noise_dimension);
  if (increments_.size() != particles * grid_.steps() * noise_dimension) {
    throw DomainError("noise: increment count does not match N * n_fine * q");
  }
}

NoiseTableau generate_tableau(std::uint64_t seed, std::uint64_t replication, std::size_t particles,
                              std::size_t noise_dimension, const TimeGrid& fine_grid,
                              ExecPolicy policy) {
  check_stream_limits(replication, particles, fine_grid.steps(), noise_dimension);
  std::vector<double> values(particles * fine_grid.steps() * noise_dimension);
  const auto rep = static_cast<std::uint32_t>(replication);
  if (policy == ExecPolicy::kParallel) {
    kernels::fill_increments_parallel(seed, rep, particles, fine_grid.steps(), noise_dimension,
                                      fine_grid.mesh(), values);
  } else {
    kernels::fill_increments_serial(seed, rep, particles, fine_grid.steps(), noise_dimension,
                                    fine_grid.mesh(), values);
  }
  return NoiseTableau(seed, replication, particles, noise_dimension, fine_grid, std::move(values));
}

NoiseTableau truncate_particles(const NoiseTableau& tableau, std::size_t particles) {
  if (particles == 0 || particles > tableau.particles()) {
    throw DomainError("noise: cannot truncate to that many particles");
  }
  const auto src = tableau.increments();
  const std::size_t stride = tableau.grid().steps() * tableau.noise_dimension();
  return NoiseTableau(tableau.seed(), tableau.replication(), particles, tableau.noise_dimension(),
                      tableau.grid(),
                      std::vector<double>(src.begin(), src.begin() + particles * stride));
}

CoarseIncrements coarsen(const NoiseTableau& tableau, const TimeGrid& coarse_grid) {
  return coarsen(tableau, coarse_grid, tableau.particles());
}

CoarseIncrements coarsen(const NoiseTableau& tableau, const TimeGrid& coarse_grid,
                         std::size_t particles) {
  const TimeGrid& fine = tableau.grid();
  if (!coarse_grid.coarsens(fine)) {
    throw DomainError("coarsen: coarse step count must divide the fine step count on the same horizon");
  }
  if (particles == 0 || particles > tableau.particles()) {
    throw DomainError("coarsen: particle count out of range");
  }
  const std::size_t q = tableau.noise_dimension();
  const std::size_t n = coarse_grid.steps();
  const std::size_t ratio = fine.steps() / n;
  CoarseIncrements out{coarse_grid, particles, q, std::vector<double>(n * particles * q)};
  for (std::size_t i = 0; i < particles; ++i) {
    const auto path = tableau.path(i);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t c = 0; c < q; ++c) {
        double sum = 0.0;
        for (std::size_t k = 0; k < ratio; ++k) sum += path[(j * ratio + k) * q + c];
        out.values[(j * particles + i) * q + c] = sum;
      }
    }
  }
  return out;
}

std::vector<double> initial_normals(std::uint64_t seed, std::uint64_t replication,
                                    std::size_t particles, std::size_t dimension) {
  check_stream_limits(replication, particles, 1, 1);
  if (dimension == 0) throw DomainError("noise: dimension must be positive");
  const auto key = key_from_seed(seed);
  std::vector<double> out(particles * dimension);
  for (std::size_t i = 0; i < particles; ++i) {
    for (std::size_t block = 0; 2 * block < dimension; ++block) {
      const auto z = normal_pair(stream_counter(static_cast<std::uint32_t>(block),
                                                static_cast<std::uint32_t>(i),
                                                static_cast<std::uint32_t>(replication),
                                                StreamTag::kInitial, 0),
                                 key);
      out[i * dimension + 2 * block] = z[0];
      if (2 * block + 1 < dimension) out[i * dimension + 2 * block + 1] = z[1];
    }
  }
  return out;
}

void write_tableau(const NoiseTableau& tableau, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  detail::put_u64(out, tableau.seed());
  detail::put_u64(out, tableau.replication());
  detail::put_u64(out, tableau.particles());
  detail::put_u64(out, tableau.noise_dimension());
  detail::put_u64(out, tableau.grid().steps());
  detail::put_f64(out, tableau.grid().horizon());
  detail::put_f64s(out, tableau.increments());
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

NoiseTableau read_tableau(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const auto seed = detail::get_u64(in);
  const auto replication = detail::get_u64(in);
  const auto particles = detail::get_u64(in);
  const auto q = detail::get_u64(in);
  const auto steps = detail::get_u64(in);
  const double horizon = detail::get_f64(in);
  check_stream_limits(replication, particles, steps, q);
  std::vector<double> values(particles * steps * q);
  detail::get_f64s(in, values);
  return NoiseTableau(seed, replication, particles, q, TimeGrid(horizon, steps), std::move(values));
}

}  // namespace mvsim
