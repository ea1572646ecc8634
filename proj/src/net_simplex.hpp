#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace sot::detail {

struct FlowEntry {
  int i;
  int j;
  double mass;
};

struct TransportSolution {
  std::vector<FlowEntry> entries;  // basic arcs with positive flow
  double cost = 0.0;
  Eigen::VectorXd u;  // source potentials
  Eigen::VectorXd v;  // sink potentials, u_i + v_j <= c_ij
};

// Dense balanced transportation problem
//   min <C, X>  s.t.  X 1 = a,  X^T 1 = b,  X >= 0
// solved by a primal network simplex with block pricing. Supplies must be
// nonnegative and sum (approximately) to the demand total; the demands are
// rescaled to balance exactly. Throws SolverStalled if the pivot cap is hit.
TransportSolution network_simplex(const Eigen::VectorXd& a,
                                  const Eigen::VectorXd& b,
                                  const Eigen::MatrixXd& cost);

// Square dense assignment problem via Jonker-Volgenant shortest augmenting
// paths. Returns the column assigned to each row plus dual potentials with
// c_ij - u_i - v_j >= 0 and equality on the assignment.
struct AssignmentSolution {
  std::vector<int> row_to_col;
  double cost = 0.0;
  Eigen::VectorXd u;
  Eigen::VectorXd v;
};
AssignmentSolution jv_assignment(const Eigen::MatrixXd& cost);

}  // namespace sot::detail
