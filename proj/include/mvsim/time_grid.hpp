#pragma once

#include <cstddef>
#include <vector>

namespace mvsim {

/// Uniform grid t_j = j * h on [0, T] with h = T / n.
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t steps);

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  double mesh() const noexcept { return mesh_; }

  /// t_j; the last node is T itself, not n * h.
  double node(std::size_t j) const;
  std::vector<double> nodes() const;

  /// True when this grid's nodes are a subset of `finer`'s nodes.
  bool coarsens(const TimeGrid& finer) const noexcept;

  bool operator==(const TimeGrid& other) const noexcept {
    return horizon_ == other.horizon_ && steps_ == other.steps_;
  }

 private:
  double horizon_;
  std::size_t steps_;
  double mesh_;
};

/// Index j with t_j < t <= t_{j+1}; 0 for t = 0.
std::size_t previous_node_index(double t, const TimeGrid& grid);

/// The step-function time projection k_n(t) of the scheme: the grid node
/// t_j with t_j < t <= t_{j+1}, and 0 at t = 0. Throws DomainError
/// outside [0, T].
double project_to_grid(double t, const TimeGrid& grid);

}  // namespace mvsim
