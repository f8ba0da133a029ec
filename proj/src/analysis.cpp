#include "mvsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "exact_reference.hpp"
#include "mvsim/error.hpp"
#include "mvsim/measures.hpp"
#include "mvsim/noise.hpp"
#include "mvsim/particles.hpp"
#include "mvsim/summation.hpp"

namespace mvsim {

double epsilon_n(std::size_t particles, std::size_t dimension) {
  if (particles < 1) throw DomainError("epsilon_n: N must be positive");
  if (dimension < 1) throw DomainError("epsilon_n: d must be at least 1");
  const double n = static_cast<double>(particles);
  if (dimension < 4) return 1.0 / std::sqrt(n);
  if (dimension == 4) return std::log(n + 1.0) / std::sqrt(n);
  return std::pow(n, -2.0 / static_cast<double>(dimension));
}

namespace {

const std::pair<EstimatorKind, const char*> kKindNames[] = {
    {EstimatorKind::kStrongTrajectory, "strong-traj"},
    {EstimatorKind::kStrongW2, "strong-W2"},
    {EstimatorKind::kWeakSemigroup, "weak-semigroup"},
    {EstimatorKind::kStrongSemigroup, "strong-semigroup"},
    {EstimatorKind::kMeanMeasureW1, "mean-measure-W1"},
};

}  // namespace

std::string to_string(EstimatorKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

EstimatorKind parse_estimator_kind(const std::string& name) {
  for (const auto& [k, n] : kKindNames) {
    if (name == n) return k;
  }
  throw DomainError("unknown estimator '" + name +
                    "' (expected strong-traj, strong-W2, weak-semigroup, strong-semigroup or "
                    "mean-measure-W1)");
}

std::string to_string(RateAxis axis) { return axis == RateAxis::kMesh ? "h" : "N"; }

RateFit fit_rate(std::span<const ErrorPoint> points, RateAxis axis) {
  if (points.size() < 4) throw DomainError("fit_rate: need at least 4 design points");
  const std::size_t m = points.size();
  std::vector<double> x(m), y(m);
  for (std::size_t k = 0; k < m; ++k) {
    const auto& p = points[k];
    if (!(p.estimate > 0.0)) {
      throw DomainError("fit_rate: nonpositive estimate at design point " + std::to_string(k));
    }
    const double coord = axis == RateAxis::kMesh ? p.mesh : static_cast<double>(p.particles);
    if (!(coord > 0.0)) throw DomainError("fit_rate: axis values must be positive");
    x[k] = std::log(coord);
    y[k] = std::log(p.estimate);
  }
  const bool increasing = std::is_sorted(x.begin(), x.end(), std::less_equal<>());
  const bool decreasing = std::is_sorted(x.begin(), x.end(), std::greater_equal<>());
  if (!increasing && !decreasing) {
    throw DomainError("fit_rate: axis values must be strictly monotone");
  }
  for (std::size_t k = 1; k < m; ++k) {
    if (x[k] == x[k - 1]) throw DomainError("fit_rate: axis values must be strictly monotone");
  }

  const double xm = pairwise_sum(x) / static_cast<double>(m);
  const double ym = pairwise_sum(y) / static_cast<double>(m);
  std::vector<double> sxx(m), sxy(m);
  for (std::size_t k = 0; k < m; ++k) {
    sxx[k] = (x[k] - xm) * (x[k] - xm);
    sxy[k] = (x[k] - xm) * (y[k] - ym);
  }
  RateFit fit;
  fit.axis = axis;
  fit.points.assign(points.begin(), points.end());
  const double denom = pairwise_sum(sxx);
  fit.slope = pairwise_sum(sxy) / denom;
  fit.intercept = ym - fit.slope * xm;
  std::vector<double> residuals(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double r = y[k] - fit.intercept - fit.slope * x[k];
    residuals[k] = r * r;
  }
  const double dof = static_cast<double>(m - 2);
  const double s2 = pairwise_sum(residuals) / dof;
  const boost::math::students_t dist(dof);
  fit.slope_half_width = boost::math::quantile(dist, 0.975) * std::sqrt(s2 / denom);
  fit.noise_ratio = 0.0;
  for (const auto& p : points) fit.noise_ratio = std::max(fit.noise_ratio, p.std_error / p.estimate);
  fit.clean = fit.noise_ratio <= 0.2;
  return fit;
}

// ---------------------------------------------------------------------------
// Sweep engine

namespace {

bool uses_flow(EstimatorKind kind) { return kind != EstimatorKind::kStrongTrajectory; }

bool is_semigroup(EstimatorKind kind) {
  return kind == EstimatorKind::kWeakSemigroup || kind == EstimatorKind::kStrongSemigroup;
}

// Everything one replication contributes to one design point.
struct RepSample {
  std::vector<double> values;  // per scheduled node; pooled samples for mean-measure
};

struct Plan {
  const SweepDesign* design;
  std::size_t dimension;
  std::size_t noise_dimension;
  TimeGrid fine_grid{1.0, 1};  // tableau grid
  std::vector<TimeGrid> grids;  // per point
  std::vector<std::size_t> particles;  // per point
  std::vector<std::vector<std::size_t>> nodes;  // scheduled nodes per point
  std::optional<detail::ExactOuStepper> stepper;
  std::vector<std::vector<double>> law_values;  // semigroup: Phi(law) per point/node
  std::vector<std::vector<FlowPoint>> laws;     // flow at scheduled nodes
};

SnapshotSchedule schedule_for(const SweepDesign& d) {
  if (d.t_eval) return SnapshotSchedule::at_time(*d.t_eval);
  if (d.kind == EstimatorKind::kMeanMeasureW1) return SnapshotSchedule::terminal();
  return SnapshotSchedule::sup_schedule();
}

void validate(const SweepDesign& d) {
  if (!d.setup.model) throw DomainError("sweep: no model");
  if (d.values.empty()) throw DomainError("sweep: no design values");
  for (std::size_t k = 0; k < d.values.size(); ++k) {
    if (d.values[k] == 0) throw DomainError("sweep: design values must be positive");
    if (k > 0 && d.values[k] <= d.values[k - 1]) {
      throw DomainError("sweep: design values must be strictly increasing");
    }
  }
  if (d.fixed == 0) throw DomainError("sweep: fixed coordinate must be positive");
  if (!(d.horizon > 0.0) || !std::isfinite(d.horizon)) {
    throw DomainError("sweep: horizon must be positive");
  }
  if (!(d.noise_gate > 0.0)) throw DomainError("sweep: noise gate must be positive");
  const auto& r = d.replications;
  if (r.adaptive) {
    if (r.initial < 2 || r.cap < r.initial) {
      throw DomainError("sweep: adaptive replications need 2 <= initial <= cap");
    }
  } else if (r.count < 2) {
    throw DomainError("sweep: need at least 2 replications");
  }
  if (d.reference.kind == ReferenceMode::Kind::kFine && d.reference.factor < 2) {
    throw DomainError("sweep: fine reference factor must be >= 2");
  }
  if (is_semigroup(d.kind) && !d.functional) {
    throw DomainError("sweep: " + to_string(d.kind) + " needs a functional");
  }
  const std::size_t dim = d.setup.model->dimension();
  if (uses_flow(d.kind)) {
    if (!d.setup.flow) {
      throw UnsupportedModelError("estimator " + to_string(d.kind) + " needs a closed-form law; '" +
                                  d.setup.model->id() + "' has none");
    }
    if (dim != 1) throw DomainError("sweep: " + to_string(d.kind) + " needs d = 1");
  } else if (d.reference.kind == ReferenceMode::Kind::kExact) {
    if (!d.setup.flow ||
        dynamic_cast<const LinearInteractionModel*>(d.setup.model.get()) == nullptr) {
      throw UnsupportedModelError("exact coupled reference needs the linear-interaction model, got '" +
                                  d.setup.model->id() + "' (use reference: fine:<factor>)");
    }
  }
  if (d.setup.initial.dimension != dim) {
    throw DomainError("sweep: initial law and model dimensions differ");
  }
}

Plan make_plan(const SweepDesign& d) {
  validate(d);
  Plan plan;
  plan.design = &d;
  plan.dimension = d.setup.model->dimension();
  plan.noise_dimension = d.setup.model->noise_dimension();
  const bool fine = d.reference.kind == ReferenceMode::Kind::kFine &&
                    d.kind == EstimatorKind::kStrongTrajectory;
  const std::size_t max_steps = d.axis == RateAxis::kMesh ? d.values.back() : d.fixed;
  std::size_t finest = d.finest_steps;
  if (finest == 0) finest = fine ? max_steps * d.reference.factor : max_steps;
  if (fine && finest < max_steps * 2) {
    throw DomainError("sweep: fine reference grid must be at least twice the finest mesh");
  }
  plan.fine_grid = TimeGrid(d.horizon, finest);
  const auto schedule = schedule_for(d);
  for (std::size_t v : d.values) {
    const std::size_t n = d.axis == RateAxis::kMesh ? v : d.fixed;
    const std::size_t particles = d.axis == RateAxis::kMesh ? d.fixed : v;
    if (finest % n != 0) {
      throw DomainError("sweep: n = " + std::to_string(n) + " does not divide the finest n = " +
                        std::to_string(finest));
    }
    if (fine && finest == n) {
      throw DomainError("sweep: fine reference grid coincides with the mesh n = " +
                        std::to_string(n));
    }
    TimeGrid grid(d.horizon, n);
    plan.nodes.push_back(schedule.resolve(grid));
    plan.grids.push_back(grid);
    plan.particles.push_back(particles);
  }
  if (d.setup.flow) {
    for (std::size_t p = 0; p < plan.grids.size(); ++p) {
      std::vector<FlowPoint> laws;
      std::vector<double> values;
      for (auto j : plan.nodes[p]) {
        laws.push_back(d.setup.flow->at(plan.grids[p].node(j)));
        if (d.functional) values.push_back(functional_on_gaussian(*d.functional, laws.back()));
      }
      plan.laws.push_back(std::move(laws));
      plan.law_values.push_back(std::move(values));
    }
  }
  if (d.kind == EstimatorKind::kStrongTrajectory && !fine) {
    plan.stepper.emplace(*d.setup.flow, plan.fine_grid);
  }
  return plan;
}

double squared_gap(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

// Simulates replication `rep` for the listed points and fills their samples.
void run_replication(const Plan& plan, std::size_t rep, std::span<const std::size_t> active,
                     std::vector<RepSample*>& out) {
  const SweepDesign& d = *plan.design;
  const auto& model = *d.setup.model;
  const std::size_t dim = plan.dimension;
  std::size_t max_particles = 0;
  for (auto p : active) max_particles = std::max(max_particles, plan.particles[p]);

  const auto tableau = generate_tableau(d.seed, rep, max_particles, plan.noise_dimension,
                                        plan.fine_grid, ExecPolicy::kSerial);
  const auto initial_all = sample_initial(d.setup.initial, d.seed, rep, max_particles);

  // Reference values of particle 0 (exact) or of the fine system, keyed by
  // fine node index and particle count.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> reference;
  if (d.kind == EstimatorKind::kStrongTrajectory) {
    std::map<std::size_t, std::vector<std::size_t>> wanted;  // particles -> fine nodes
    for (auto p : active) {
      const std::size_t ratio = plan.fine_grid.steps() / plan.grids[p].steps();
      const std::size_t key = plan.stepper ? 0 : plan.particles[p];
      for (auto j : plan.nodes[p]) wanted[key].push_back(j * ratio);
    }
    for (auto& [particles, fine_nodes] : wanted) {
      std::sort(fine_nodes.begin(), fine_nodes.end());
      fine_nodes.erase(std::unique(fine_nodes.begin(), fine_nodes.end()), fine_nodes.end());
      if (plan.stepper) {
        std::vector<double> path(fine_nodes.size());
        plan.stepper->path(tableau, 0, initial_all.positions()[0], fine_nodes, path);
        for (std::size_t k = 0; k < fine_nodes.size(); ++k) {
          reference[{0, fine_nodes[k]}] = {path[k]};
        }
      } else {
        const auto sub = truncate_particles(tableau, particles);
        const ParticleEnsemble initial(
            0.0, dim,
            std::vector<double>(initial_all.positions().begin(),
                                initial_all.positions().begin() +
                                    static_cast<std::ptrdiff_t>(particles * dim)));
        const auto record = simulate(model, plan.fine_grid, initial, sub,
                                     SnapshotSchedule::nodes(fine_nodes), ExecPolicy::kSerial);
        for (const auto& s : record.snapshots) {
          reference[{particles, s.node}] =
              std::vector<double>(s.positions.begin(), s.positions.begin() + static_cast<std::ptrdiff_t>(dim));
        }
      }
    }
  }

  for (std::size_t a = 0; a < active.size(); ++a) {
    const std::size_t p = active[a];
    const std::size_t particles = plan.particles[p];
    const auto& grid = plan.grids[p];
    const ParticleEnsemble initial(
        0.0, dim,
        std::vector<double>(initial_all.positions().begin(),
                            initial_all.positions().begin() +
                                static_cast<std::ptrdiff_t>(particles * dim)));
    const auto increments = coarsen(tableau, grid, particles);
    const Provenance provenance{d.seed, rep, model.id(), particles, grid.steps()};
    const auto record = simulate(model, initial, increments, SnapshotSchedule::nodes(plan.nodes[p]),
                                 provenance, ExecPolicy::kSerial);
    auto& values = out[a]->values;
    values.clear();
    const std::size_t ratio = plan.fine_grid.steps() / grid.steps();
    for (std::size_t k = 0; k < record.snapshots.size(); ++k) {
      const auto& s = record.snapshots[k];
      const std::span<const double> positions(s.positions);
      switch (d.kind) {
        case EstimatorKind::kStrongTrajectory: {
          const std::size_t key = plan.stepper ? 0 : particles;
          const auto& ref = reference.at({key, s.node * ratio});
          values.push_back(squared_gap(positions.subspan(0, dim), ref));
          break;
        }
        case EstimatorKind::kStrongW2:
          values.push_back(w2_squared_to_gaussian_samples(positions, plan.laws[p][k].mean,
                                                          plan.laws[p][k].variance));
          break;
        case EstimatorKind::kWeakSemigroup:
        case EstimatorKind::kStrongSemigroup: {
          FunctionalOptions options;
          options.seed = d.seed ^ (0x9E3779B97F4A7C15ull * (rep + 1));
          const auto v = functional_eval(*d.functional, positions, options);
          values.push_back(v.value - plan.law_values[p][k]);
          break;
        }
        case EstimatorKind::kMeanMeasureW1:
          values.assign(positions.begin(), positions.end());
          break;
      }
    }
  }
}

struct NodeStats {
  double mean;
  double std_error;
};

NodeStats stats(std::vector<double>& scratch) {
  const double r = static_cast<double>(scratch.size());
  const double mean = pairwise_sum(scratch) / r;
  for (double& v : scratch) v = (v - mean) * (v - mean);
  const double var = pairwise_sum(scratch) / (r - 1.0);
  return {mean, std::sqrt(var / r)};
}

ErrorPoint base_point(const Plan& plan, std::size_t p, EstimatorKind kind, std::size_t reps) {
  const SweepDesign& d = *plan.design;
  ErrorPoint e;
  e.particles = plan.particles[p];
  e.steps = plan.grids[p].steps();
  e.mesh = plan.grids[p].mesh();
  e.horizon = d.horizon;
  e.model_id = d.setup.model->id();
  e.functional_id = d.functional && is_semigroup(kind) ? d.functional->id : "";
  e.kind = kind;
  e.replications = reps;
  return e;
}

bool gate(double estimate, double std_error, std::size_t reps, double limit) {
  return reps >= 2 && estimate > 0.0 && std_error <= limit * estimate;
}

// Max over nodes of the replication means of f(value); std error at the
// maximising node. Also the mean of the per-replication max.
ErrorPoint node_max(const Plan& plan, std::size_t p, EstimatorKind kind,
                    const std::vector<RepSample>& samples, std::size_t reps, bool absolute_mean) {
  const std::size_t nodes = plan.nodes[p].size();
  ErrorPoint e = base_point(plan, p, kind, reps);
  std::vector<double> scratch(reps);
  double best = -1.0;
  double best_se = 0.0;
  for (std::size_t k = 0; k < nodes; ++k) {
    for (std::size_t r = 0; r < reps; ++r) {
      const double v = samples[r].values[k];
      scratch[r] = kind == EstimatorKind::kStrongSemigroup ? std::abs(v) : v;
    }
    auto s = stats(scratch);
    if (absolute_mean) s.mean = std::abs(s.mean);
    if (s.mean > best) {
      best = s.mean;
      best_se = s.std_error;
    }
  }
  e.estimate = best;
  e.std_error = best_se;
  if (kind == EstimatorKind::kStrongTrajectory || kind == EstimatorKind::kStrongW2) {
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& v = samples[r].values;
      scratch[r] = *std::max_element(v.begin(), v.end());
    }
    const auto s = stats(scratch);
    e.secondary = s.mean;
    e.secondary_std_error = s.std_error;
  }
  return e;
}

double pooled_w1(const std::vector<RepSample>& samples, std::size_t begin, std::size_t end,
                 std::size_t skip_begin, std::size_t skip_end, const FlowPoint& law) {
  std::vector<double> pooled;
  for (std::size_t r = begin; r < end; ++r) {
    if (r >= skip_begin && r < skip_end) continue;
    pooled.insert(pooled.end(), samples[r].values.begin(), samples[r].values.end());
  }
  return w1_to_gaussian_samples(pooled, law.mean, law.variance);
}

ErrorPoint mean_measure_point(const Plan& plan, std::size_t p,
                              const std::vector<RepSample>& samples, std::size_t reps) {
  ErrorPoint e = base_point(plan, p, EstimatorKind::kMeanMeasureW1, reps);
  const FlowPoint law = plan.laws[p].back();
  e.estimate = pooled_w1(samples, 0, reps, 0, 0, law);
  // Grouped jackknife over contiguous blocks of replications.
  const std::size_t groups = std::min<std::size_t>(8, reps);
  std::vector<double> loo(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    loo[g] = pooled_w1(samples, 0, reps, g * reps / groups, (g + 1) * reps / groups, law);
  }
  const double mean = pairwise_sum(loo) / static_cast<double>(groups);
  for (double& v : loo) v = (v - mean) * (v - mean);
  e.std_error = std::sqrt(static_cast<double>(groups - 1) / static_cast<double>(groups) *
                          pairwise_sum(loo));
  e.secondary = epsilon_n(std::max<std::size_t>(2, reps * plan.particles[p]), 1);
  return e;
}

struct PointResult {
  ErrorPoint primary;
  std::optional<ErrorPoint> companion;
};

PointResult summarise(const Plan& plan, std::size_t p, const std::vector<RepSample>& samples,
                      std::size_t reps) {
  const SweepDesign& d = *plan.design;
  PointResult out;
  switch (d.kind) {
    case EstimatorKind::kStrongTrajectory:
    case EstimatorKind::kStrongW2:
      out.primary = node_max(plan, p, d.kind, samples, reps, false);
      break;
    case EstimatorKind::kWeakSemigroup:
      out.primary = node_max(plan, p, d.kind, samples, reps, true);
      out.companion = node_max(plan, p, EstimatorKind::kStrongSemigroup, samples, reps, false);
      break;
    case EstimatorKind::kStrongSemigroup:
      out.primary = node_max(plan, p, d.kind, samples, reps, false);
      out.companion = node_max(plan, p, EstimatorKind::kWeakSemigroup, samples, reps, true);
      break;
    case EstimatorKind::kMeanMeasureW1:
      out.primary = mean_measure_point(plan, p, samples, reps);
      break;
  }
  out.primary.clean = gate(out.primary.estimate, out.primary.std_error, reps, d.noise_gate);
  if (out.companion) {
    out.companion->clean =
        gate(out.companion->estimate, out.companion->std_error, reps, d.noise_gate);
  }
  return out;
}

std::string describe(const ErrorPoint& e) {
  std::ostringstream s;
  s << "N=" << e.particles << " n=" << e.steps << " R=" << e.replications
    << " estimate=" << format_double(e.estimate) << " se=" << format_double(e.std_error);
  return s.str();
}

}  // namespace

SweepResult run_sweep(const SweepDesign& design, const ProgressFn& progress) {
  const Plan plan = make_plan(design);
  const std::size_t points = design.values.size();
  const auto& policy = design.replications;

  std::vector<std::vector<RepSample>> samples(points);
  std::vector<std::size_t> reps(points, 0);
  std::vector<bool> done(points, false);
  std::vector<PointResult> results(points);

  std::size_t target = policy.adaptive ? policy.initial : policy.count;
  std::size_t completed = 0;  // replications simulated for every active point so far
  while (true) {
    std::vector<std::size_t> active;
    for (std::size_t p = 0; p < points; ++p) {
      if (!done[p]) active.push_back(p);
    }
    if (active.empty()) break;
    for (auto p : active) samples[p].resize(target);

    const auto first = static_cast<std::ptrdiff_t>(completed);
    const auto last = static_cast<std::ptrdiff_t>(target);
    std::vector<std::exception_ptr> errors(target - completed);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t r = first; r < last; ++r) {
      try {
        std::vector<RepSample*> out;
        for (auto p : active) out.push_back(&samples[p][static_cast<std::size_t>(r)]);
        run_replication(plan, static_cast<std::size_t>(r), active, out);
      } catch (...) {
        errors[static_cast<std::size_t>(r - first)] = std::current_exception();
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    for (auto p : active) {
      reps[p] = target;
      results[p] = summarise(plan, p, samples[p], target);
      const auto& e = results[p].primary;
      bool finished = !policy.adaptive || e.clean || target >= policy.cap;
      if (!finished && e.estimate == 0.0 && e.std_error == 0.0) finished = true;
      // Forecast with an optimistic estimate so a low draw does not stop a
      // point that the cap could still resolve.
      if (!finished && policy.forecast_stop && target >= policy.forecast_min) {
        const double optimistic = e.estimate + 2.0 * e.std_error;
        const double ratio = e.std_error / (design.noise_gate * optimistic);
        const double projected = static_cast<double>(target) * ratio * ratio;
        if (projected > static_cast<double>(policy.cap)) finished = true;
      }
      if (!finished && policy.work_budget > 0.0) {
        const double next = static_cast<double>(std::min(target * 2, policy.cap));
        const double cost = next * static_cast<double>(plan.particles[p]) *
                            static_cast<double>(plan.grids[p].steps());
        if (cost > policy.work_budget) finished = true;
      }
      done[p] = finished;
      if (progress) {
        progress(to_string(design.kind) + " " + describe(e) + (e.clean ? " clean" : " noisy") +
                 (finished ? "" : " (doubling R)"));
      }
      if (finished) {
        samples[p].clear();
        samples[p].shrink_to_fit();
      }
    }
    completed = target;
    if (!policy.adaptive) break;
    target = std::min(target * 2, policy.cap);
  }

  SweepResult result;
  for (std::size_t p = 0; p < points; ++p) {
    result.points.push_back(results[p].primary);
    if (results[p].companion) result.companions.push_back(*results[p].companion);
    if (!results[p].primary.clean) result.budget_exhausted = true;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Single-point estimators

namespace {

ErrorPoint single_point(const ModelSetup& setup, std::optional<Functional> phi,
                        EstimatorKind kind, std::size_t particles, const TimeGrid& grid,
                        std::size_t replications, std::uint64_t seed,
                        const EstimatorOptions& options) {
  SweepDesign d;
  d.setup = setup;
  d.functional = std::move(phi);
  d.kind = kind;
  d.horizon = grid.horizon();
  d.axis = RateAxis::kMesh;
  d.values = {grid.steps()};
  d.fixed = particles;
  d.reference = options.reference;
  d.t_eval = options.t_eval;
  d.seed = seed;
  d.replications.adaptive = false;
  d.replications.count = replications;
  d.noise_gate = options.noise_gate;
  return run_sweep(d).points.front();
}

}  // namespace

ErrorPoint strong_error_trajectory(const ModelSetup& setup, std::size_t particles,
                                   const TimeGrid& grid, std::size_t replications,
                                   std::uint64_t seed, const EstimatorOptions& options) {
  return single_point(setup, std::nullopt, EstimatorKind::kStrongTrajectory, particles, grid,
                      replications, seed, options);
}

ErrorPoint strong_error_w2(const ModelSetup& setup, std::size_t particles, const TimeGrid& grid,
                           std::size_t replications, std::uint64_t seed,
                           const EstimatorOptions& options) {
  return single_point(setup, std::nullopt, EstimatorKind::kStrongW2, particles, grid,
                      replications, seed, options);
}

ErrorPoint weak_error_semigroup(const ModelSetup& setup, const Functional& phi,
                                std::size_t particles, const TimeGrid& grid,
                                std::size_t replications, std::uint64_t seed,
                                const EstimatorOptions& options) {
  return single_point(setup, phi, EstimatorKind::kWeakSemigroup, particles, grid, replications,
                      seed, options);
}

ErrorPoint strong_error_semigroup(const ModelSetup& setup, const Functional& phi,
                                  std::size_t particles, const TimeGrid& grid,
                                  std::size_t replications, std::uint64_t seed,
                                  const EstimatorOptions& options) {
  return single_point(setup, phi, EstimatorKind::kStrongSemigroup, particles, grid,
                      replications, seed, options);
}

ErrorPoint mean_measure_w1(const ModelSetup& setup, std::size_t particles, const TimeGrid& grid,
                           std::size_t replications, std::uint64_t seed,
                           const EstimatorOptions& options) {
  return single_point(setup, std::nullopt, EstimatorKind::kMeanMeasureW1, particles, grid,
                      replications, seed, options);
}

// ---------------------------------------------------------------------------
// Serialisation

namespace {

nlohmann::ordered_json number(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace

nlohmann::ordered_json to_json(const ErrorPoint& p) {
  nlohmann::ordered_json j;
  j["N"] = p.particles;
  j["n"] = p.steps;
  j["h"] = p.mesh;
  j["T"] = p.horizon;
  j["model"] = p.model_id;
  j["functional"] = p.functional_id;
  j["estimator"] = to_string(p.kind);
  j["estimate"] = number(p.estimate);
  j["std_error"] = number(p.std_error);
  j["R"] = p.replications;
  j["secondary"] = number(p.secondary);
  j["secondary_std_error"] = number(p.secondary_std_error);
  j["clean"] = p.clean;
  return j;
}

nlohmann::ordered_json to_json(const RateFit& fit) {
  nlohmann::ordered_json j;
  j["axis"] = to_string(fit.axis);
  j["slope"] = number(fit.slope);
  j["intercept"] = number(fit.intercept);
  j["half_width"] = number(fit.slope_half_width);
  j["noise_ratio"] = number(fit.noise_ratio);
  j["clean"] = fit.clean;
  auto points = nlohmann::ordered_json::array();
  for (const auto& p : fit.points) points.push_back(to_json(p));
  j["points"] = std::move(points);
  return j;
}

std::string error_point_csv_header() {
  return "N,n,h,T,model,functional,estimator,estimate,std_error,R,secondary,secondary_std_error,"
         "clean";
}

std::string to_csv_row(const ErrorPoint& p) {
  std::ostringstream s;
  s << p.particles << ',' << p.steps << ',' << format_double(p.mesh) << ','
    << format_double(p.horizon) << ',' << p.model_id << ',' << p.functional_id << ','
    << to_string(p.kind) << ',' << format_double(p.estimate) << ','
    << format_double(p.std_error) << ',' << p.replications << ',' << format_double(p.secondary)
    << ',' << format_double(p.secondary_std_error) << ',' << (p.clean ? 1 : 0);
  return s.str();
}

}  // namespace mvsim
