#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mvsim/coefficient_model.hpp"
#include "mvsim/measure_view.hpp"
#include "mvsim/noise.hpp"
#include "mvsim/reference_models.hpp"
#include "mvsim/time_grid.hpp"

namespace mvsim {

/// N particle positions in R^d at one time.
class ParticleEnsemble {
 public:
  ParticleEnsemble(double time, std::size_t dimension, std::vector<double> positions);

  double time() const noexcept { return time_; }
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return positions_.size() / dimension_; }
  std::span<const double> positions() const noexcept { return positions_; }
  std::span<const double> position(std::size_t i) const noexcept {
    return std::span<const double>(positions_).subspan(i * dimension_, dimension_);
  }

  /// The induced empirical measure; valid while this ensemble is alive.
  EmpiricalMeasureView view() const { return EmpiricalMeasureView(positions_, dimension_); }

  bool operator==(const ParticleEnsemble& other) const = default;

 private:
  double time_;
  std::size_t dimension_;
  std::vector<double> positions_;
};

/// Draws the initial ensemble xi^i ~ law from the replication's init stream.
ParticleEnsemble sample_initial(const InitialLaw& law, std::uint64_t seed,
                                std::uint64_t replication, std::size_t particles);

/// Which grid nodes a simulation keeps.
class SnapshotSchedule {
 public:
  static SnapshotSchedule all_nodes();
  static SnapshotSchedule terminal();
  /// round(k * n / 16) for k = 0..16, deduplicated: a fixed-resolution
  /// stand-in for sup over [0, T].
  static SnapshotSchedule sup_schedule();
  /// The node at time t (snapped to the nearest node; must lie in [0, T]).
  static SnapshotSchedule at_time(double t);
  static SnapshotSchedule nodes(std::vector<std::size_t> indices);

  /// Increasing, deduplicated node indices for a grid.
  std::vector<std::size_t> resolve(const TimeGrid& grid) const;

 private:
  enum class Kind { kAll, kTerminal, kSup, kTime, kExplicit };
  Kind kind_ = Kind::kAll;
  double time_ = 0.0;
  std::vector<std::size_t> indices_;
};

struct Provenance {
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  std::string model_id;
  std::size_t particles = 0;
  std::size_t steps = 0;
};

struct Snapshot {
  std::size_t node;
  double time;
  std::vector<double> positions;
};

struct TrajectoryRecord {
  TimeGrid grid;
  std::size_t dimension;
  std::size_t particles;
  Provenance provenance;
  std::vector<Snapshot> snapshots;

  const Snapshot& at_node(std::size_t node) const;
  bool operator==(const TrajectoryRecord& other) const;
};

struct CoupledRecords {
  TrajectoryRecord scheme;
  TrajectoryRecord reference;
};

/// One Euler-Maruyama step of the interacting particle system:
/// X_{j+1} = X_j + b(t_j, X_j, mu_j) h + sigma(t_j, X_j, mu_j) dW with the
/// empirical measure frozen at t_j. `increments` is particle-major (N * q).
/// Throws IntegrationError on a non-finite result.
ParticleEnsemble em_step(const ParticleEnsemble& ensemble, double h,
                         std::span<const double> increments, const CoefficientModel& model,
                         ExecPolicy policy = ExecPolicy::kParallel, std::size_t step_index = 0);

/// Iterates em_step over the grid using the increments coarsened from the
/// tableau. Only the scheduled nodes are stored.
TrajectoryRecord simulate(const CoefficientModel& model, const TimeGrid& grid,
                          const ParticleEnsemble& initial, const NoiseTableau& tableau,
                          const SnapshotSchedule& schedule = SnapshotSchedule::all_nodes(),
                          ExecPolicy policy = ExecPolicy::kParallel);

TrajectoryRecord simulate(const CoefficientModel& model, const ParticleEnsemble& initial,
                          const CoarseIncrements& increments, const SnapshotSchedule& schedule,
                          const Provenance& provenance, ExecPolicy policy = ExecPolicy::kParallel);

/// Scheme on `grid` paired with the exact McKean-Vlasov reference of the
/// linear-interaction model: every reference particle is driven by the
/// true mean m(s), the same initial value and the same fine Brownian
/// increments. Reference snapshots sit at the scheme's scheduled nodes.
/// Throws UnsupportedModelError for any other model.
CoupledRecords simulate_coupled_ou(const CoefficientModel& model, const InitialLaw& law,
                                   const TimeGrid& grid, const NoiseTableau& tableau,
                                   const SnapshotSchedule& schedule = SnapshotSchedule::all_nodes(),
                                   ExecPolicy policy = ExecPolicy::kParallel);

/// Scheme on `coarse_grid` paired with the same particle system run on the
/// grid refined by `refinement_factor` (>= 2), sharing initial values and
/// Brownian paths.
CoupledRecords simulate_coupled_fine(const CoefficientModel& model, const InitialLaw& law,
                                     const TimeGrid& coarse_grid, std::size_t refinement_factor,
                                     const NoiseTableau& tableau,
                                     const SnapshotSchedule& schedule = SnapshotSchedule::all_nodes(),
                                     ExecPolicy policy = ExecPolicy::kParallel);

/// CSV with header "replication,time,particle,coordinate,value".
void write_trajectory_csv(const TrajectoryRecord& record, std::ostream& out,
                          bool header = true);

/// Binary form: header (seed, replication, N, d, n, T, snapshot count) as
/// little-endian 64-bit fields, then per snapshot the node index (u64),
/// time (f64) and positions (particle-major, coordinate-innermost f64).
void write_trajectory_binary(const TrajectoryRecord& record, const std::filesystem::path& path);
TrajectoryRecord read_trajectory_binary(const std::filesystem::path& path);

}  // namespace mvsim
