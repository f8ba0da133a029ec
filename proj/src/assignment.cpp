#include "mvsim/assignment.hpp"

#include <limits>

#include "mvsim/error.hpp"

namespace mvsim {

// Rows and columns are 1-based inside the solver; column 0 is the virtual
// root of each augmenting-path search.
Assignment solve_assignment(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw DomainError("assignment: cost matrix must be n x n");
  Assignment result;
  if (n == 0) return result;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto c = [&](std::size_t row, std::size_t col) { return cost[(row - 1) * n + (col - 1)]; };

  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> col_owner(n + 1, 0), way(n + 1, 0);
  std::vector<bool> row_assigned(n + 1, false);

  // Column reduction: v_j = min_i c_ij keeps every reduced cost nonnegative;
  // each column's argmin row takes it when still free.
  for (std::size_t j = n; j >= 1; --j) {
    std::size_t best = 1;
    for (std::size_t i = 2; i <= n; ++i) {
      if (c(i, j) < c(best, j)) best = i;
    }
    v[j] = c(best, j);
    if (!row_assigned[best]) {
      row_assigned[best] = true;
      col_owner[j] = best;
    }
  }

  std::vector<double> min_reduced(n + 1);
  std::vector<bool> used(n + 1);
  for (std::size_t row = 1; row <= n; ++row) {
    if (row_assigned[row]) continue;
    col_owner[0] = row;
    std::size_t j0 = 0;
    std::fill(min_reduced.begin(), min_reduced.end(), kInf);
    std::fill(used.begin(), used.end(), false);
    // Dijkstra over reduced costs until a free column is reached.
    do {
      used[j0] = true;
      const std::size_t i0 = col_owner[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double reduced = c(i0, j) - u[i0] - v[j];
        if (reduced < min_reduced[j]) {
          min_reduced[j] = reduced;
          way[j] = j0;
        }
        if (min_reduced[j] < delta) {
          delta = min_reduced[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[col_owner[j]] += delta;
          v[j] -= delta;
        } else {
          min_reduced[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_owner[j0] != 0);
    // Augment along the alternating path back to the root.
    do {
      const std::size_t j1 = way[j0];
      col_owner[j0] = col_owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  result.row_to_col.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) result.row_to_col[col_owner[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) result.cost += cost[i * n + result.row_to_col[i]];
  return result;
}

}  // namespace mvsim
