#pragma once

// Exact minimum-cost perfect assignment on a square cost matrix, the
// shortest-augmenting-path formulation with dual potentials (O(n^3)).

#include <Eigen/Core>

#include <limits>
#include <stdexcept>
#include <vector>

namespace pwa {

// Returns the column assigned to each row; total cost is the sum over rows
// of cost(r, assignment[r]).
inline std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols())
    throw std::invalid_argument("solve_assignment: cost matrix must be square");
  const int n = static_cast<int>(cost.rows());
  const double kInf = std::numeric_limits<double>::infinity();

  // 1-based arrays; p[j] = row matched to column j.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) assignment[p[j] - 1] = j - 1;
  return assignment;
}

inline double assignment_cost(const Eigen::MatrixXd& cost,
                              const std::vector<int>& assignment) {
  double total = 0.0;
  for (int r = 0; r < static_cast<int>(assignment.size()); ++r)
    total += cost(r, assignment[static_cast<std::size_t>(r)]);
  return total;
}

}  // namespace pwa
