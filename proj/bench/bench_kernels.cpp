// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mvsim/kernels.hpp"
#include "mvsim/noise.hpp"
#include "mvsim/particles.hpp"
#include "mvsim/reference_models.hpp"

namespace {

std::vector<double> normals(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> v(count);
  for (auto& x : v) x = normal(rng);
  return v;
}

template <bool Parallel>
void BM_EmStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const mvsim::HolderDriftModel model(-1.0, 0.5, -0.2, 1.0);
  const auto x = normals(n, 1);
  const auto dw = normals(n, 2);
  const mvsim::EmpiricalMeasureView mu(x, 1);
  std::vector<double> out(n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      mvsim::kernels::em_step_parallel(model, 0.0, 0.01, mu, dw, out);
    } else {
      mvsim::kernels::em_step_serial(model, 0.0, 0.01, mu, dw, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <bool Parallel>
void BM_FillIncrements(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t steps = 64;
  std::vector<double> out(n * steps);
  for (auto _ : state) {
    if constexpr (Parallel) {
      mvsim::kernels::fill_increments_parallel(7, 0, n, steps, 1, 1.0 / steps, out);
    } else {
      mvsim::kernels::fill_increments_serial(7, 0, n, steps, 1, 1.0 / steps, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * steps));
}

template <bool Parallel>
void BM_Moments(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = normals(n, 3);
  std::vector<double> mean(1), second(1);
  for (auto _ : state) {
    if constexpr (Parallel) {
      mvsim::kernels::moments_parallel(x, 1, mean, second);
    } else {
      mvsim::kernels::moments_serial(x, 1, mean, second);
    }
    benchmark::DoNotOptimize(mean.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_Simulate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto policy = state.range(1) ? mvsim::ExecPolicy::kParallel : mvsim::ExecPolicy::kSerial;
  const auto setup = mvsim::find_model("ou-linear").make(mvsim::find_model("ou-linear").defaults);
  const mvsim::TimeGrid grid(1.0, 64);
  const auto tableau = mvsim::generate_tableau(1, 0, n, 1, grid);
  const auto init = mvsim::sample_initial(setup.initial, 1, 0, n);
  for (auto _ : state) {
    auto record = mvsim::simulate(*setup.model, grid, init, tableau,
                                  mvsim::SnapshotSchedule::terminal(), policy);
    benchmark::DoNotOptimize(record.snapshots.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * 64));
}

}  // namespace

BENCHMARK(BM_EmStep<false>)->Name("em_step/serial")->RangeMultiplier(8)->Range(1 << 10, 1 << 19);
BENCHMARK(BM_EmStep<true>)->Name("em_step/parallel")->RangeMultiplier(8)->Range(1 << 10, 1 << 19);
BENCHMARK(BM_FillIncrements<false>)->Name("fill_increments/serial")->Range(1 << 8, 1 << 14);
BENCHMARK(BM_FillIncrements<true>)->Name("fill_increments/parallel")->Range(1 << 8, 1 << 14);
BENCHMARK(BM_Moments<false>)->Name("moments/serial")->RangeMultiplier(8)->Range(1 << 10, 1 << 19);
BENCHMARK(BM_Moments<true>)->Name("moments/parallel")->RangeMultiplier(8)->Range(1 << 10, 1 << 19);
BENCHMARK(BM_Simulate)->Name("simulate")->ArgsProduct({{1 << 10, 1 << 14}, {0, 1}});

BENCHMARK_MAIN();
