#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mvsim {

struct Assignment {
  std::vector<std::size_t> row_to_col;
  double cost = 0.0;
};

/// Minimum-cost perfect matching on a dense n x n cost matrix (row-major)
/// by shortest augmenting paths with dual potentials, after a
/// Jonker-Volgenant column reduction. O(n^3) worst case, O(n) scratch per
/// call.
Assignment solve_assignment(std::span<const double> cost, std::size_t n);

}  // namespace mvsim
