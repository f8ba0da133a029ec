#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvsim/format.hpp"
#include "mvsim/functional.hpp"
#include "mvsim/reference_models.hpp"
#include "mvsim/time_grid.hpp"

namespace mvsim {

/// Sampling rate of empirical measures in dimension d:
/// N^{-1/2} (d < 4), N^{-1/2} log(N + 1) (d = 4), N^{-2/d} (d > 4).
double epsilon_n(std::size_t particles, std::size_t dimension);

enum class EstimatorKind {
  kStrongTrajectory,
  kStrongW2,
  kWeakSemigroup,
  kStrongSemigroup,
  kMeanMeasureW1,
};

std::string to_string(EstimatorKind kind);
/// Accepts the names produced by to_string; throws DomainError otherwise.
EstimatorKind parse_estimator_kind(const std::string& name);

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ErrorPoint {
  std::size_t particles = 0;
  std::size_t steps = 0;
  double mesh = 0.0;
  double horizon = 0.0;
  std::string model_id;
  std::string functional_id;
  EstimatorKind kind = EstimatorKind::kStrongTrajectory;
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t replications = 0;
  // kStrongTrajectory / kStrongW2: mean over replications of the max over
  // scheduled nodes (sup inside the expectation).
  // kMeanMeasureW1: the pooling floor epsilon_{R N}.
  double secondary = kNaN;
  double secondary_std_error = kNaN;
  bool clean = false;
};

enum class RateAxis { kMesh, kParticles };

std::string to_string(RateAxis axis);

struct RateFit {
  RateAxis axis = RateAxis::kMesh;
  std::vector<ErrorPoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_half_width = 0.0;  // 95%, Student t with n - 2 dof
  double noise_ratio = 0.0;       // max std_error / estimate
  bool clean = false;             // noise_ratio <= 0.2
};

/// Least squares of log(estimate) on log(h) or log(N). Throws DomainError
/// with fewer than 4 points, a nonpositive estimate, or axis values that
/// are not strictly monotone.
RateFit fit_rate(std::span<const ErrorPoint> points, RateAxis axis);

struct ReferenceMode {
  enum class Kind { kExact, kFine };
  Kind kind = Kind::kExact;
  std::size_t factor = 64;
};

/// Fixed R, or doubling from `initial` until the noise gate passes or `cap`.
struct ReplicationPolicy {
  bool adaptive = false;
  std::size_t count = 100;
  std::size_t initial = 64;
  std::size_t cap = std::size_t{1} << 16;
  // Stop doubling once R >= forecast_min and the projected R exceeds cap.
  bool forecast_stop = true;
  std::size_t forecast_min = 1024;
  double work_budget = 0.0;  // max particle-steps N * n * R per point; 0: unlimited
};

/// A full experiment design: one model, one estimator, a sweep over n or N.
/// All meshes are driven by one finest-grid tableau per replication.
struct SweepDesign {
  ModelSetup setup;
  std::optional<Functional> functional;
  EstimatorKind kind = EstimatorKind::kWeakSemigroup;
  double horizon = 1.0;
  RateAxis axis = RateAxis::kMesh;
  std::vector<std::size_t> values;  // n for kMesh, N for kParticles
  std::size_t fixed = 0;            // N for kMesh, n for kParticles
  std::size_t finest_steps = 0;     // 0: max n (exact) or max n * factor (fine)
  ReferenceMode reference;
  std::optional<double> t_eval;  // nullopt: sup over the 16 + T schedule
  std::uint64_t seed = 1;
  ReplicationPolicy replications;
  double noise_gate = 0.2;
};

struct SweepResult {
  std::vector<ErrorPoint> points;
  // For semigroup estimators: the other of weak/strong from the same samples.
  std::vector<ErrorPoint> companions;
  bool budget_exhausted = false;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Runs the design. Results are independent of the OpenMP thread count.
/// Throws DomainError for invalid designs and UnsupportedModelError when
/// the estimator needs a flow or reference the model lacks.
SweepResult run_sweep(const SweepDesign& design, const ProgressFn& progress = {});

struct EstimatorOptions {
  ReferenceMode reference;
  std::optional<double> t_eval;
  double noise_gate = 0.2;
};

/// max over scheduled nodes of E|X^{1,n}_t - Xbar^1_t|^2 (particle 1 of the
/// synchronously coupled pair); `secondary` holds E[max_t |.|^2].
ErrorPoint strong_error_trajectory(const ModelSetup& setup, std::size_t particles,
                                   const TimeGrid& grid, std::size_t replications,
                                   std::uint64_t seed, const EstimatorOptions& options = {});

/// max over scheduled nodes of E[W2(mu^{N,n}_t, law_t)^2].
ErrorPoint strong_error_w2(const ModelSetup& setup, std::size_t particles, const TimeGrid& grid,
                           std::size_t replications, std::uint64_t seed,
                           const EstimatorOptions& options = {});

/// |E[Phi(mu^{N,n}_t)] - Phi(law_t)|.
ErrorPoint weak_error_semigroup(const ModelSetup& setup, const Functional& phi,
                                std::size_t particles, const TimeGrid& grid,
                                std::size_t replications, std::uint64_t seed,
                                const EstimatorOptions& options = {});

/// E|Phi(mu^{N,n}_t) - Phi(law_t)|.
ErrorPoint strong_error_semigroup(const ModelSetup& setup, const Functional& phi,
                                  std::size_t particles, const TimeGrid& grid,
                                  std::size_t replications, std::uint64_t seed,
                                  const EstimatorOptions& options = {});

/// W1 between the pooled R*N samples at t (estimating E[mu^{N,n}_t]) and
/// law_t. std_error is a grouped jackknife over replications.
ErrorPoint mean_measure_w1(const ModelSetup& setup, std::size_t particles, const TimeGrid& grid,
                           std::size_t replications, std::uint64_t seed,
                           const EstimatorOptions& options = {});

nlohmann::ordered_json to_json(const ErrorPoint& point);
nlohmann::ordered_json to_json(const RateFit& fit);

/// Header line for error-point CSV rows.
std::string error_point_csv_header();
std::string to_csv_row(const ErrorPoint& point);

}  // namespace mvsim
