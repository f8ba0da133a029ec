#include "mvsim/time_grid.hpp"

#include <cmath>

#include "mvsim/error.hpp"

namespace mvsim {

TimeGrid::TimeGrid(double horizon, std::size_t steps)
    : horizon_(horizon), steps_(steps), mesh_(0.0) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw DomainError("time grid: horizon must be positive and finite");
  }
  if (steps == 0) throw DomainError("time grid: at least one step required");
  mesh_ = horizon / static_cast<double>(steps);
}

double TimeGrid::node(std::size_t j) const {
  if (j > steps_) throw DomainError("time grid: node index out of range");
  if (j == steps_) return horizon_;
  return static_cast<double>(j) * mesh_;
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> out(steps_ + 1);
  for (std::size_t j = 0; j <= steps_; ++j) out[j] = node(j);
  return out;
}

bool TimeGrid::coarsens(const TimeGrid& finer) const noexcept {
  return horizon_ == finer.horizon_ && finer.steps_ % steps_ == 0;
}

std::size_t previous_node_index(double t, const TimeGrid& grid) {
  if (!(t >= 0.0) || t > grid.horizon()) {
    throw DomainError("k_n: time outside [0, T]");
  }
  if (t == 0.0) return 0;
  const double ratio = std::ceil(t / grid.mesh());
  std::size_t j = ratio >= 1.0 ? static_cast<std::size_t>(ratio) - 1 : 0;
  if (j >= grid.steps()) j = grid.steps() - 1;
  // Repair rounding in t / h so that t_j < t <= t_{j+1} holds for the
  // nodes as the grid actually represents them.
  while (j > 0 && grid.node(j) >= t) --j;
  while (j + 1 < grid.steps() && grid.node(j + 1) < t) ++j;
  return j;
}

double project_to_grid(double t, const TimeGrid& grid) {
  return grid.node(previous_node_index(t, grid));
}

}  // namespace mvsim
