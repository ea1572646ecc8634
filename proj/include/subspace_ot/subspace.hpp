#pragma once

#include <Eigen/Dense>
#include <vector>

#include "subspace_ot/errors.hpp"

namespace sot {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// A k-dimensional linear subspace E of R^d, stored as a full orthogonal
// basis whose first k columns span E and whose trailing d-k columns span
// the orthogonal complement.
class Subspace {
 public:
  static constexpr double kOrthoTol = 1e-8;

  // basis_full must be d x d with ||V^T V - I||_F <= kOrthoTol.
  Subspace(MatrixXd basis_full, Eigen::Index k);

  // First k canonical axes.
  static Subspace canonical(Eigen::Index d, Eigen::Index k);

  // Permutation basis putting the listed axes (0-based, distinct) first,
  // remaining axes after them in increasing order.
  static Subspace from_axes(Eigen::Index d, const std::vector<int>& axes);

  // Completes a d x k orthonormal frame to a full basis whose first k
  // columns are exactly v_e.
  static Subspace from_basis(const MatrixXd& v_e);

  Eigen::Index dim() const { return basis_.rows(); }
  Eigen::Index k() const { return k_; }

  const MatrixXd& basis_full() const { return basis_; }
  // d x k basis of E.
  MatrixXd v_e() const { return basis_.leftCols(k_); }
  // d x (d-k) basis of the complement.
  MatrixXd v_perp() const { return basis_.rightCols(basis_.cols() - k_); }
  // Orthogonal projector V_E V_E^T.
  MatrixXd projector() const { return v_e() * v_e().transpose(); }

  // Coordinates of x in the (V_E, V_perp) basis.
  VectorXd to_local(const VectorXd& x) const { return basis_.transpose() * x; }

 private:
  MatrixXd basis_;
  Eigen::Index k_;
};

}  // namespace sot
