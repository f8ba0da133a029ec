#include "mvsim/particles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "binary_io.hpp"
#include "exact_reference.hpp"
#include "mvsim/error.hpp"
#include "mvsim/format.hpp"
#include "mvsim/kernels.hpp"
#include "mvsim/philox.hpp"

namespace mvsim {

ParticleEnsemble::ParticleEnsemble(double time, std::size_t dimension,
                                   std::vector<double> positions)
    : time_(time), dimension_(dimension), positions_(std::move(positions)) {
  if (dimension == 0) throw DomainError("ensemble: dimension must be positive");
  if (positions_.empty() || positions_.size() % dimension != 0) {
    throw DomainError("ensemble: need a nonempty whole number of points");
  }
  for (std::size_t k = 0; k < positions_.size(); ++k) {
    if (!std::isfinite(positions_[k])) throw IntegrationError(k / dimension, 0);
  }
}

ParticleEnsemble sample_initial(const InitialLaw& law, std::uint64_t seed,
                                std::uint64_t replication, std::size_t particles) {
  if (!(law.variance >= 0.0)) throw DomainError("initial law: variance must be nonnegative");
  auto values = initial_normals(seed, replication, particles, law.dimension);
  const double scale = std::sqrt(law.variance);
  for (double& v : values) v = law.mean + scale * v;
  return ParticleEnsemble(0.0, law.dimension, std::move(values));
}

// ---------------------------------------------------------------------------
// Snapshot schedules

SnapshotSchedule SnapshotSchedule::all_nodes() { return SnapshotSchedule{}; }

SnapshotSchedule SnapshotSchedule::terminal() {
  SnapshotSchedule s;
  s.kind_ = Kind::kTerminal;
  return s;
}

SnapshotSchedule SnapshotSchedule::sup_schedule() {
  SnapshotSchedule s;
  s.kind_ = Kind::kSup;
  return s;
}

SnapshotSchedule SnapshotSchedule::at_time(double t) {
  SnapshotSchedule s;
  s.kind_ = Kind::kTime;
  s.time_ = t;
  return s;
}

SnapshotSchedule SnapshotSchedule::nodes(std::vector<std::size_t> indices) {
  SnapshotSchedule s;
  s.kind_ = Kind::kExplicit;
  s.indices_ = std::move(indices);
  return s;
}

std::vector<std::size_t> SnapshotSchedule::resolve(const TimeGrid& grid) const {
  const std::size_t n = grid.steps();
  std::vector<std::size_t> out;
  switch (kind_) {
    case Kind::kAll:
      out.resize(n + 1);
      for (std::size_t j = 0; j <= n; ++j) out[j] = j;
      return out;
    case Kind::kTerminal:
      return {n};
    case Kind::kSup:
      for (std::size_t k = 0; k <= 16; ++k) {
        out.push_back(static_cast<std::size_t>(
            std::llround(static_cast<double>(k) * static_cast<double>(n) / 16.0)));
      }
      break;
    case Kind::kTime: {
      if (!(time_ >= 0.0) || time_ > grid.horizon() * (1.0 + 1e-12)) {
        throw DomainError("schedule: time outside [0, T]");
      }
      const auto j = static_cast<std::size_t>(std::llround(time_ / grid.mesh()));
      if (j > n || std::abs(grid.node(j) - time_) > 1e-9 * grid.horizon()) {
        throw DomainError("schedule: time " + format_double(time_) + " is not a grid node");
      }
      return {j};
    }
    case Kind::kExplicit:
      out = indices_;
      for (auto j : out) {
        if (j > n) throw DomainError("schedule: node index beyond the grid");
      }
      break;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw DomainError("schedule: no nodes selected");
  return out;
}

// ---------------------------------------------------------------------------
// Records

const Snapshot& TrajectoryRecord::at_node(std::size_t node) const {
  for (const auto& s : snapshots) {
    if (s.node == node) return s;
  }
  throw DomainError("trajectory: node " + std::to_string(node) + " was not recorded");
}

bool TrajectoryRecord::operator==(const TrajectoryRecord& other) const {
  if (!(grid == other.grid) || dimension != other.dimension || particles != other.particles ||
      snapshots.size() != other.snapshots.size()) {
    return false;
  }
  for (std::size_t k = 0; k < snapshots.size(); ++k) {
    const auto& a = snapshots[k];
    const auto& b = other.snapshots[k];
    if (a.node != b.node || a.time != b.time || a.positions != b.positions) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Time stepping

namespace {

std::size_t run_kernel(const CoefficientModel& model, double t, double h,
                       const EmpiricalMeasureView& mu, std::span<const double> dw,
                       std::span<double> out, ExecPolicy policy) {
  return policy == ExecPolicy::kParallel ? kernels::em_step_parallel(model, t, h, mu, dw, out)
                                         : kernels::em_step_serial(model, t, h, mu, dw, out);
}

void check_model_fits(const CoefficientModel& model, std::size_t dimension,
                      std::size_t noise_dimension) {
  if (model.dimension() != dimension) throw DomainError("model and ensemble dimensions differ");
  if (model.noise_dimension() != noise_dimension) {
    throw DomainError("model and noise dimensions differ");
  }
}

}  // namespace

ParticleEnsemble em_step(const ParticleEnsemble& ensemble, double h,
                         std::span<const double> increments, const CoefficientModel& model,
                         ExecPolicy policy, std::size_t step_index) {
  check_model_fits(model, ensemble.dimension(), model.noise_dimension());
  if (increments.size() != ensemble.size() * model.noise_dimension()) {
    throw DomainError("em_step: need one q-vector of increments per particle");
  }
  const auto mu = ensemble.view();
  std::vector<double> next(ensemble.positions().size());
  const auto bad = run_kernel(model, ensemble.time(), h, mu, increments, next, policy);
  if (bad != kernels::kNoFailure) throw IntegrationError(bad, step_index);
  return ParticleEnsemble(ensemble.time() + h, ensemble.dimension(), std::move(next));
}

TrajectoryRecord simulate(const CoefficientModel& model, const ParticleEnsemble& initial,
                          const CoarseIncrements& increments, const SnapshotSchedule& schedule,
                          const Provenance& provenance, ExecPolicy policy) {
  check_model_fits(model, initial.dimension(), increments.noise_dimension);
  if (initial.size() != increments.particles) {
    throw DomainError("simulate: ensemble size differs from the increment tableau");
  }
  const TimeGrid& grid = increments.grid;
  const auto wanted = schedule.resolve(grid);
  const std::size_t d = initial.dimension();

  TrajectoryRecord record{grid, d, initial.size(), provenance, {}};
  record.provenance.particles = initial.size();
  record.provenance.steps = grid.steps();
  record.snapshots.reserve(wanted.size());

  std::vector<double> current(initial.positions().begin(), initial.positions().end());
  std::vector<double> next(current.size());
  std::size_t cursor = 0;
  const std::size_t last = wanted.back();
  for (std::size_t j = 0;; ++j) {
    if (cursor < wanted.size() && wanted[cursor] == j) {
      record.snapshots.push_back({j, grid.node(j), current});
      ++cursor;
    }
    if (j == last) break;
    const EmpiricalMeasureView mu(current, d);
    const auto bad = run_kernel(model, grid.node(j), grid.mesh(), mu, increments.step(j), next,
                                policy);
    if (bad != kernels::kNoFailure) throw IntegrationError(bad, j);
    current.swap(next);
  }
  return record;
}

TrajectoryRecord simulate(const CoefficientModel& model, const TimeGrid& grid,
                          const ParticleEnsemble& initial, const NoiseTableau& tableau,
                          const SnapshotSchedule& schedule, ExecPolicy policy) {
  const auto increments = coarsen(tableau, grid, initial.size());
  Provenance provenance{tableau.seed(), tableau.replication(), model.id(), initial.size(),
                        grid.steps()};
  return simulate(model, initial, increments, schedule, provenance, policy);
}

// ---------------------------------------------------------------------------
// Exact linear reference

namespace detail {

ExactOuStepper::ExactOuStepper(const GaussianFlow& flow, const TimeGrid& fine_grid)
    : flow_(&flow), grid_(fine_grid) {
  const double h = fine_grid.mesh();
  const double a = flow.a();
  const double x = a * h;
  decay_ = std::exp(x);
  mean_gain_ = std::exp((a + flow.bbar()) * h) - decay_;
  // Cov(conv, dW) = h (e^x - 1)/x, Var(conv) = h (e^{2x} - 1)/(2x).
  const double cov = x == 0.0 ? h : h * std::expm1(x) / x;
  c1_ = cov / h;
  double residual;  // Var(conv) - Cov^2 / h, cancellation-free near x = 0
  if (std::abs(x) < 1e-3) {
    residual = h * x * x * (1.0 / 12.0 + x / 12.0 + 17.0 * x * x / 360.0);
  } else {
    const double var = h * std::expm1(2.0 * x) / (2.0 * x);
    residual = var - cov * cov / h;
  }
  c2_ = std::sqrt(std::max(0.0, residual));
}

void ExactOuStepper::path(const NoiseTableau& tableau, std::size_t particle, double x0,
                          std::span<const std::size_t> fine_nodes, std::span<double> out) const {
  const auto key = key_from_seed(tableau.seed());
  const auto rep = static_cast<std::uint32_t>(tableau.replication());
  const auto dw = tableau.path(particle);
  const double sigma = flow_->sigma0();
  const std::size_t last = fine_nodes.empty() ? 0 : fine_nodes.back();
  double x = x0;
  std::size_t cursor = 0;
  std::array<double, 2> z{};
  for (std::size_t j = 0;; ++j) {
    if (cursor < fine_nodes.size() && fine_nodes[cursor] == j) out[cursor++] = x;
    if (j == last) break;
    if (j % 2 == 0) {
      z = normal_pair(stream_counter(static_cast<std::uint32_t>(j / 2),
                                     static_cast<std::uint32_t>(particle), rep,
                                     StreamTag::kConvolution, 0),
                      key);
    }
    const double convolution = c1_ * dw[j] + c2_ * z[j % 2];
    x = decay_ * x + flow_->mean(grid_.node(j)) * mean_gain_ + sigma * convolution;
  }
}

}  // namespace detail

namespace {

const LinearInteractionModel& require_linear(const CoefficientModel& model) {
  const auto* linear = dynamic_cast<const LinearInteractionModel*>(&model);
  if (linear == nullptr) {
    throw UnsupportedModelError("exact coupled reference needs the linear-interaction model, got '" +
                                model.id() + "' (use simulate_coupled_fine)");
  }
  return *linear;
}

}  // namespace

CoupledRecords simulate_coupled_ou(const CoefficientModel& model, const InitialLaw& law,
                                   const TimeGrid& grid, const NoiseTableau& tableau,
                                   const SnapshotSchedule& schedule, ExecPolicy policy) {
  const auto& linear = require_linear(model);
  if (!grid.coarsens(tableau.grid())) {
    throw DomainError("coupled: scheme grid must coarsen the tableau grid");
  }
  const GaussianFlow flow(linear.a(), linear.bbar(), linear.sigma0(), law.mean, law.variance);
  const auto initial = sample_initial(law, tableau.seed(), tableau.replication(),
                                      tableau.particles());
  auto scheme = simulate(model, grid, initial, tableau, schedule, policy);

  const auto coarse_nodes = schedule.resolve(grid);
  const std::size_t ratio = tableau.grid().steps() / grid.steps();
  std::vector<std::size_t> fine_nodes(coarse_nodes.size());
  for (std::size_t k = 0; k < coarse_nodes.size(); ++k) fine_nodes[k] = coarse_nodes[k] * ratio;

  const std::size_t n_particles = tableau.particles();
  std::vector<double> values(n_particles * coarse_nodes.size());
  const detail::ExactOuStepper stepper(flow, tableau.grid());
#pragma omp parallel for schedule(static) if (policy == ExecPolicy::kParallel && n_particles >= 64)
  for (std::size_t i = 0; i < n_particles; ++i) {
    stepper.path(tableau, i, initial.positions()[i], fine_nodes,
                 std::span<double>(values).subspan(i * coarse_nodes.size(), coarse_nodes.size()));
  }

  TrajectoryRecord ref{grid, 1, n_particles, scheme.provenance, {}};
  ref.provenance.model_id = model.id() + ":exact-reference";
  ref.provenance.steps = tableau.grid().steps();
  for (std::size_t k = 0; k < coarse_nodes.size(); ++k) {
    Snapshot s{coarse_nodes[k], grid.node(coarse_nodes[k]), std::vector<double>(n_particles)};
    for (std::size_t i = 0; i < n_particles; ++i) {
      s.positions[i] = values[i * coarse_nodes.size() + k];
    }
    ref.snapshots.push_back(std::move(s));
  }
  return {std::move(scheme), std::move(ref)};
}

CoupledRecords simulate_coupled_fine(const CoefficientModel& model, const InitialLaw& law,
                                     const TimeGrid& coarse_grid, std::size_t refinement_factor,
                                     const NoiseTableau& tableau,
                                     const SnapshotSchedule& schedule, ExecPolicy policy) {
  if (refinement_factor < 2) throw DomainError("coupled: refinement factor must be >= 2");
  const TimeGrid fine_grid(coarse_grid.horizon(), coarse_grid.steps() * refinement_factor);
  if (!fine_grid.coarsens(tableau.grid())) {
    throw DomainError("coupled: refined grid must coarsen the tableau grid");
  }
  const auto initial = sample_initial(law, tableau.seed(), tableau.replication(),
                                      tableau.particles());
  auto scheme = simulate(model, coarse_grid, initial, tableau, schedule, policy);

  const auto coarse_nodes = schedule.resolve(coarse_grid);
  std::vector<std::size_t> fine_nodes(coarse_nodes.size());
  for (std::size_t k = 0; k < coarse_nodes.size(); ++k) {
    fine_nodes[k] = coarse_nodes[k] * refinement_factor;
  }
  auto reference =
      simulate(model, fine_grid, initial, tableau, SnapshotSchedule::nodes(fine_nodes), policy);
  reference.grid = coarse_grid;
  for (std::size_t k = 0; k < reference.snapshots.size(); ++k) {
    reference.snapshots[k].node = coarse_nodes[k];
  }
  return {std::move(scheme), std::move(reference)};
}

// ---------------------------------------------------------------------------
// Export

void write_trajectory_csv(const TrajectoryRecord& record, std::ostream& out, bool header) {
  if (header) out << "replication,time,particle,coordinate,value\n";
  const std::string rep = std::to_string(record.provenance.replication);
  for (const auto& s : record.snapshots) {
    const std::string time = format_double(s.time);
    for (std::size_t i = 0; i < record.particles; ++i) {
      for (std::size_t k = 0; k < record.dimension; ++k) {
        out << rep << ',' << time << ',' << i << ',' << k << ','
            << format_double(s.positions[i * record.dimension + k]) << '\n';
      }
    }
  }
}

void write_trajectory_binary(const TrajectoryRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  detail::put_u64(out, record.provenance.seed);
  detail::put_u64(out, record.provenance.replication);
  detail::put_u64(out, record.particles);
  detail::put_u64(out, record.dimension);
  detail::put_u64(out, record.grid.steps());
  detail::put_f64(out, record.grid.horizon());
  detail::put_u64(out, record.snapshots.size());
  for (const auto& s : record.snapshots) {
    detail::put_u64(out, s.node);
    detail::put_f64(out, s.time);
    detail::put_f64s(out, s.positions);
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

TrajectoryRecord read_trajectory_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Provenance provenance;
  provenance.seed = detail::get_u64(in);
  provenance.replication = detail::get_u64(in);
  const auto particles = detail::get_u64(in);
  const auto dimension = detail::get_u64(in);
  const auto steps = detail::get_u64(in);
  const double horizon = detail::get_f64(in);
  const auto count = detail::get_u64(in);
  provenance.particles = particles;
  provenance.steps = steps;
  TrajectoryRecord record{TimeGrid(horizon, steps), dimension, particles, provenance, {}};
  for (std::uint64_t k = 0; k < count; ++k) {
    Snapshot s;
    s.node = detail::get_u64(in);
    s.time = detail::get_f64(in);
    s.positions.resize(particles * dimension);
    detail::get_f64s(in, s.positions);
    record.snapshots.push_back(std::move(s));
  }
  return record;
}

}  // namespace mvsim
