#pragma once

#include <Eigen/Dense>

#include "subspace_ot/errors.hpp"

namespace sot {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Symmetric eigendecomposition with eigenvalues sorted nonincreasing.
struct EigenFactorization {
  VectorXd eigenvalues;   // nonincreasing
  MatrixXd eigenvectors;  // columns, orthonormal

  MatrixXd reconstruct() const {
    return eigenvectors * eigenvalues.asDiagonal() *
           eigenvectors.transpose();
  }
};

// Symmetric positive semidefinite matrix. Symmetry is enforced at
// construction (the stored matrix is the symmetrized input); the spectrum
// is checked against -eig_floor whenever an eigendecomposition is taken,
// and optionally at construction.
//
// eig_floor is relative: the effective clipping threshold for a matrix with
// largest eigenvalue lmax is eig_floor * lmax. Eigenvalues in
// [-floor, floor] are clipped to zero; anything below -floor is rejected.
class SpdMatrix {
 public:
  static constexpr double kDefaultSymTol = 1e-8;
  static constexpr double kDefaultEigFloor = 1e-10;

  SpdMatrix() = default;

  // Validating constructor. Throws AsymmetricInput if the relative
  // asymmetry exceeds sym_tol; with check_spectrum also throws
  // IndefiniteInput if an eigenvalue falls below -eig_floor * lmax.
  explicit SpdMatrix(const MatrixXd& m, double sym_tol = kDefaultSymTol,
                     double eig_floor = kDefaultEigFloor,
                     bool check_spectrum = true);

  // Wraps a matrix known to be symmetric PSD (outputs of the kernels
  // below). Symmetrizes but skips the spectrum check.
  static SpdMatrix trusted(const MatrixXd& m,
                           double sym_tol = kDefaultSymTol,
                           double eig_floor = kDefaultEigFloor);

  static SpdMatrix identity(Eigen::Index d);

  Eigen::Index dim() const { return entries_.rows(); }
  const MatrixXd& entries() const { return entries_; }
  double sym_tol() const { return sym_tol_; }
  double eig_floor() const { return eig_floor_; }

  double trace() const { return entries_.trace(); }

  // Eigendecomposition with the spectrum invariant enforced: throws
  // IndefiniteInput if min eigenvalue < -eig_floor * lmax, clips the
  // remaining negatives to zero.
  EigenFactorization factorize() const;

 private:
  SpdMatrix(MatrixXd m, double sym_tol, double eig_floor, int /*trusted*/)
      : entries_(std::move(m)), sym_tol_(sym_tol), eig_floor_(eig_floor) {}

  MatrixXd entries_;
  double sym_tol_ = kDefaultSymTol;
  double eig_floor_ = kDefaultEigFloor;
};

// Matrix square root via symmetric eigendecomposition. S*S = M up to
// 1e-8 relative Frobenius error; eigenvalues below the floor are clipped
// to zero before rooting.
SpdMatrix sqrtm(const SpdMatrix& m);

// (M + reg*I)^{-1/2}. Throws SingularInput when the regularized spectrum
// still touches the floor.
SpdMatrix inv_sqrtm(const SpdMatrix& m, double reg = 0.0);

// Lower Cholesky factor. On LLT failure the diagonal is jittered,
// escalating tenfold per retry; FactorizationFailed after the last
// escalation. max_escalations = 0 disables the retries.
MatrixXd cholesky_lower(const SpdMatrix& m, double jitter = 0.0,
                        int max_escalations = 7);

// Schur complement of the leading k x k block:
// M22 - M12^T M11^{-1} M12, computed with Cholesky solves under the
// jitter escalation policy. Throws SingularBlock if the leading block
// cannot be factorized after regularization.
SpdMatrix schur_complement(const SpdMatrix& m, Eigen::Index k);

struct PolarOptions {
  bool strict = false;       // throw RankDeficient instead of patching
  double rank_tol = 1e-12;   // relative to the largest singular value
};

// Orthogonal polar factor: the nearest orthogonal matrix to m. In
// non-strict mode zero singular directions are mapped to +1.
MatrixXd polar_unitary(const MatrixXd& m, const PolarOptions& opts = {});

// Moore-Penrose pseudo-inverse through the eigendecomposition:
// eigenvalues above the floor are inverted, the rest zeroed.
SpdMatrix pseudo_inverse(const SpdMatrix& m);

// Solves M X = rhs through Cholesky with jitter escalation
// (1e-12 .. 1e-6 relative). Throws SingularBlock if every escalation
// fails. Shared by the Schur/Monge-Knothe block inversions.
MatrixXd spd_solve(const SpdMatrix& m, const MatrixXd& rhs);

}  // namespace sot
