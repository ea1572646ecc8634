#include <algorithm>
#include <limits>
#include <vector>

#include "net_simplex.hpp"
#include "subspace_ot/errors.hpp"

namespace sot::detail {

// Jonker-Volgenant style shortest augmenting path assignment on a dense
// square cost matrix. Maintains dual feasibility c_ij - u_i - v_j >= 0
// with complementary slackness on the matched pairs.
AssignmentSolution jv_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw DimensionMismatch("assignment needs square cost");
  if (n == 0) throw EmptyInput("assignment on empty cost");
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // One-based with a virtual column 0, following the classical layout.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0);  // match[j] = row assigned to column j
  std::vector<int> way(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = -1;
      double delta = kInf;
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
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }

  AssignmentSolution sol;
  sol.row_to_col.assign(n, -1);
  sol.u = Eigen::VectorXd::Zero(n);
  sol.v = Eigen::VectorXd::Zero(n);
  for (int j = 1; j <= n; ++j) sol.row_to_col[match[j] - 1] = j - 1;
  for (int i = 0; i < n; ++i) sol.u(i) = u[i + 1];
  for (int j = 0; j < n; ++j) sol.v(j) = v[j + 1];
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += cost(i, sol.row_to_col[i]);
  sol.cost = total;
  return sol;
}

}  // namespace sot::detail
