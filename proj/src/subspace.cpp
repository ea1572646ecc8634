#include "subspace_ot/subspace.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <sstream>

namespace sot {

Subspace::Subspace(MatrixXd basis_full, Eigen::Index k)
    : basis_(std::move(basis_full)), k_(k) {
  const Eigen::Index d = basis_.rows();
  if (basis_.cols() != d) throw DimensionMismatch("basis must be square");
  if (k < 1 || k > d) {
    std::ostringstream os;
    os << "k=" << k << " outside [1, " << d << "]";
    throw InvalidInput(os.str());
  }
  const double err =
      (basis_.transpose() * basis_ - MatrixXd::Identity(d, d)).norm();
  if (err > kOrthoTol) {
    std::ostringstream os;
    os << "basis orthogonality error " << err;
    throw InvalidInput(os.str());
  }
}

Subspace Subspace::canonical(Eigen::Index d, Eigen::Index k) {
  return Subspace(MatrixXd::Identity(d, d), k);
}

Subspace Subspace::from_axes(Eigen::Index d, const std::vector<int>& axes) {
  if (axes.empty()) throw InvalidInput("empty axis list");
  std::vector<bool> used(static_cast<std::size_t>(d), false);
  MatrixXd basis = MatrixXd::Zero(d, d);
  Eigen::Index col = 0;
  for (int a : axes) {
    if (a < 0 || a >= d) throw InvalidInput("axis index out of range");
    if (used[static_cast<std::size_t>(a)]) {
      throw InvalidInput("duplicate axis index");
    }
    used[static_cast<std::size_t>(a)] = true;
    basis(a, col++) = 1.0;
  }
  for (Eigen::Index a = 0; a < d; ++a) {
    if (!used[static_cast<std::size_t>(a)]) basis(a, col++) = 1.0;
  }
  return Subspace(std::move(basis), static_cast<Eigen::Index>(axes.size()));
}

Subspace Subspace::from_basis(const MatrixXd& v_e) {
  const Eigen::Index d = v_e.rows();
  const Eigen::Index k = v_e.cols();
  if (k < 1 || k > d) throw InvalidInput("frame has invalid column count");
  if ((v_e.transpose() * v_e - MatrixXd::Identity(k, k)).norm() > kOrthoTol) {
    throw InvalidInput("frame columns are not orthonormal");
  }
  if (k == d) return Subspace(v_e, k);
  // Householder QR of the frame yields an orthogonal completion of its
  // column span; keep the original frame columns verbatim.
  Eigen::HouseholderQR<MatrixXd> qr(v_e);
  MatrixXd q = qr.householderQ();
  MatrixXd basis(d, d);
  basis.leftCols(k) = v_e;
  basis.rightCols(d - k) = q.rightCols(d - k);
  return Subspace(std::move(basis), k);
}

}  // namespace sot
