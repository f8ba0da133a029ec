#include "mvsim/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mvsim/philox.hpp"
#include "mvsim/summation.hpp"

namespace mvsim::kernels {
namespace {

// Particles below this count are stepped on the calling thread.
constexpr std::size_t kParallelThreshold = 512;
// Leaf size of the blocked pairwise moment reduction.
constexpr std::size_t kMomentBlock = 2048;

inline bool advance_particle(const CoefficientModel& model, double t, double h,
                             const EmpiricalMeasureView& mu, std::span<const double> dw,
                             std::span<double> out, std::size_t i, std::span<double> drift,
                             std::span<double> diffusion) {
  const std::size_t d = mu.dimension();
  const std::size_t q = model.noise_dimension();
  const auto x = mu.point(i);
  model.drift(t, x, mu, drift);
  model.diffusion(t, x, mu, diffusion);
  const double* w = dw.data() + i * q;
  bool finite = true;
  for (std::size_t k = 0; k < d; ++k) {
    double noise = 0.0;
    for (std::size_t c = 0; c < q; ++c) noise += diffusion[k * q + c] * w[c];
    const double next = x[k] + drift[k] * h + noise;
    out[i * d + k] = next;
    finite = finite && std::isfinite(next);
  }
  return finite;
}

inline void fill_particle(const Philox4x32::Key& key, std::uint32_t replication,
                          std::size_t particle, std::size_t steps, std::size_t q, double scale,
                          double* out) {
  for (std::size_t c = 0; c < q; ++c) {
    for (std::size_t block = 0; 2 * block < steps; ++block) {
      const auto z = normal_pair(
          stream_counter(static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(particle),
                         replication, StreamTag::kBrownian, static_cast<std::uint32_t>(c)),
          key);
      const std::size_t j = 2 * block;
      out[j * q + c] = scale * z[0];
      if (j + 1 < steps) out[(j + 1) * q + c] = scale * z[1];
    }
  }
}

// Block partial sums of x_k and x_k^2 for one coordinate.
inline void block_moments(std::span<const double> points, std::size_t d, std::size_t k,
                          std::size_t begin, std::size_t end, double& first, double& second) {
  const std::size_t count = end - begin;
  first = pairwise_sum_strided(points.data() + begin * d + k, count, d);
  std::vector<double> squares(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double v = points[(begin + i) * d + k];
    squares[i] = v * v;
  }
  second = pairwise_sum(squares);
}

void finish_moments(std::size_t n, std::size_t d, std::size_t blocks,
                    const std::vector<double>& first, const std::vector<double>& second,
                    std::span<double> mean, std::span<double> second_moment) {
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < d; ++k) {
    mean[k] = pairwise_sum(std::span<const double>(first).subspan(k * blocks, blocks)) * inv;
    second_moment[k] =
        pairwise_sum(std::span<const double>(second).subspan(k * blocks, blocks)) * inv;
  }
}

}  // namespace

std::size_t em_step_serial(const CoefficientModel& model, double t, double h,
                           const EmpiricalMeasureView& mu, std::span<const double> dw,
                           std::span<double> out) {
  const std::size_t d = mu.dimension();
  const std::size_t q = model.noise_dimension();
  std::vector<double> drift(d), diffusion(d * q);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!advance_particle(model, t, h, mu, dw, out, i, drift, diffusion)) return i;
  }
  return kNoFailure;
}

std::size_t em_step_parallel(const CoefficientModel& model, double t, double h,
                             const EmpiricalMeasureView& mu, std::span<const double> dw,
                             std::span<double> out) {
  const std::size_t n = mu.size();
  const std::size_t d = mu.dimension();
  const std::size_t q = model.noise_dimension();
  std::size_t first_bad = kNoFailure;
#pragma omp parallel if (n >= kParallelThreshold) reduction(min : first_bad)
  {
    std::vector<double> drift(d), diffusion(d * q);
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      if (!advance_particle(model, t, h, mu, dw, out, i, drift, diffusion)) {
        first_bad = std::min(first_bad, i);
      }
    }
  }
  return first_bad;
}

void fill_increments_serial(std::uint64_t seed, std::uint32_t replication, std::size_t particles,
                            std::size_t steps, std::size_t noise_dimension, double mesh,
                            std::span<double> out) {
  const auto key = key_from_seed(seed);
  const double scale = std::sqrt(mesh);
  const std::size_t stride = steps * noise_dimension;
  for (std::size_t i = 0; i < particles; ++i) {
    fill_particle(key, replication, i, steps, noise_dimension, scale, out.data() + i * stride);
  }
}

void fill_increments_parallel(std::uint64_t seed, std::uint32_t replication,
                              std::size_t particles, std::size_t steps,
                              std::size_t noise_dimension, double mesh, std::span<double> out) {
  const auto key = key_from_seed(seed);
  const double scale = std::sqrt(mesh);
  const std::size_t stride = steps * noise_dimension;
  const bool big = particles * steps >= 4 * kParallelThreshold;
#pragma omp parallel for schedule(static) if (big)
  for (std::size_t i = 0; i < particles; ++i) {
    fill_particle(key, replication, i, steps, noise_dimension, scale, out.data() + i * stride);
  }
}

void moments_serial(std::span<const double> points, std::size_t dimension, std::span<double> mean,
                    std::span<double> second_moment) {
  const std::size_t n = points.size() / dimension;
  const std::size_t blocks = (n + kMomentBlock - 1) / kMomentBlock;
  std::vector<double> first(dimension * blocks), second(dimension * blocks);
  for (std::size_t k = 0; k < dimension; ++k) {
    for (std::size_t b = 0; b < blocks; ++b) {
      block_moments(points, dimension, k, b * kMomentBlock, std::min(n, (b + 1) * kMomentBlock),
                    first[k * blocks + b], second[k * blocks + b]);
    }
  }
  finish_moments(n, dimension, blocks, first, second, mean, second_moment);
}

void moments_parallel(std::span<const double> points, std::size_t dimension,
                      std::span<double> mean, std::span<double> second_moment) {
  const std::size_t n = points.size() / dimension;
  const std::size_t blocks = (n + kMomentBlock - 1) / kMomentBlock;
  std::vector<double> first(dimension * blocks), second(dimension * blocks);
  const std::size_t jobs = dimension * blocks;
#pragma omp parallel for schedule(static) if (jobs > 1)
  for (std::size_t job = 0; job < jobs; ++job) {
    const std::size_t k = job / blocks;
    const std::size_t b = job % blocks;
    block_moments(points, dimension, k, b * kMomentBlock, std::min(n, (b + 1) * kMomentBlock),
                  first[job], second[job]);
  }
  finish_moments(n, dimension, blocks, first, second, mean, second_moment);
}

}  // namespace mvsim::kernels
