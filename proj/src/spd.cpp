#include "subspace_ot/spd.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace sot {

namespace {

double max_abs(const MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

EigenFactorization factorize_symmetric(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw FactorizationFailed("symmetric eigendecomposition did not converge");
  }
  EigenFactorization f;
  f.eigenvalues = solver.eigenvalues().reverse();
  f.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return f;
}

}  // namespace

SpdMatrix::SpdMatrix(const MatrixXd& m, double sym_tol, double eig_floor,
                     bool check_spectrum)
    : sym_tol_(sym_tol), eig_floor_(eig_floor) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << "matrix is " << m.rows() << "x" << m.cols();
    throw DimensionMismatch(os.str());
  }
  if (m.size() == 0) throw InvalidInput("empty matrix");
  if (!m.allFinite()) throw InvalidInput("matrix has non-finite entries");
  const double scale = max_abs(m);
  const double asym = max_abs(m - m.transpose());
  if (asym > sym_tol * std::max(scale, 1e-300)) {
    std::ostringstream os;
    os << "relative asymmetry " << asym / std::max(scale, 1e-300)
       << " exceeds tolerance " << sym_tol;
    throw AsymmetricInput(os.str());
  }
  entries_ = 0.5 * (m + m.transpose());
  if (check_spectrum) (void)factorize();
}

SpdMatrix SpdMatrix::trusted(const MatrixXd& m, double sym_tol,
                             double eig_floor) {
  MatrixXd sym = 0.5 * (m + m.transpose());
  return SpdMatrix(std::move(sym), sym_tol, eig_floor, 0);
}

SpdMatrix SpdMatrix::identity(Eigen::Index d) {
  return SpdMatrix::trusted(MatrixXd::Identity(d, d));
}

EigenFactorization SpdMatrix::factorize() const {
  EigenFactorization f = factorize_symmetric(entries_);
  const double lmax = std::max(f.eigenvalues(0), 0.0);
  const double floor = eig_floor_ * std::max(lmax, 1e-300);
  const double lmin = f.eigenvalues(f.eigenvalues.size() - 1);
  if (lmin < -floor) {
    std::ostringstream os;
    os << "min eigenvalue " << lmin << " below -" << floor;
    throw IndefiniteInput(os.str());
  }
  for (Eigen::Index i = 0; i < f.eigenvalues.size(); ++i) {
    if (f.eigenvalues(i) < floor) f.eigenvalues(i) = 0.0;
  }
  return f;
}

SpdMatrix sqrtm(const SpdMatrix& m) {
  EigenFactorization f = m.factorize();
  const VectorXd roots = f.eigenvalues.cwiseSqrt();
  MatrixXd s = f.eigenvectors * roots.asDiagonal() * f.eigenvectors.transpose();
  return SpdMatrix::trusted(s, m.sym_tol(), m.eig_floor());
}

SpdMatrix inv_sqrtm(const SpdMatrix& m, double reg) {
  if (reg < 0) throw InvalidInput("negative regularization");
  EigenFactorization f = factorize_symmetric(m.entries());
  const double lmax = std::max(f.eigenvalues(0), 0.0);
  const double floor = m.eig_floor() * std::max(lmax, 1e-300);
  const double lmin = f.eigenvalues(f.eigenvalues.size() - 1);
  if (lmin < -floor) {
    std::ostringstream os;
    os << "min eigenvalue " << lmin << " below -" << floor;
    throw IndefiniteInput(os.str());
  }
  if (lmin + reg <= floor) {
    std::ostringstream os;
    os << "min eigenvalue " << lmin << " + reg " << reg
       << " does not clear the floor " << floor;
    throw SingularInput(os.str());
  }
  VectorXd inv_roots(f.eigenvalues.size());
  for (Eigen::Index i = 0; i < f.eigenvalues.size(); ++i) {
    inv_roots(i) = 1.0 / std::sqrt(f.eigenvalues(i) + reg);
  }
  MatrixXd s =
      f.eigenvectors * inv_roots.asDiagonal() * f.eigenvectors.transpose();
  return SpdMatrix::trusted(s, m.sym_tol(), m.eig_floor());
}

namespace {

// Attempts LLT of m + jitter*scale*I; returns true and fills L on success.
bool try_llt(const MatrixXd& m, double jitter_abs, MatrixXd* L) {
  MatrixXd shifted = m;
  if (jitter_abs > 0) {
    shifted.diagonal().array() += jitter_abs;
  }
  Eigen::LLT<MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success) return false;
  *L = llt.matrixL();
  // LLT can silently produce garbage near singularity; verify.
  const double scale = 1.0 + shifted.norm();
  if (((*L) * L->transpose() - shifted).norm() > 1e-8 * scale) return false;
  if (L->diagonal().minCoeff() <= 0) return false;
  return true;
}

}  // namespace

MatrixXd cholesky_lower(const SpdMatrix& m, double jitter,
                        int max_escalations) {
  const double scale = std::max(m.entries().diagonal().maxCoeff(), 1.0);
  MatrixXd L;
  if (try_llt(m.entries(), jitter * scale, &L)) return L;
  double j = std::max(jitter, 1e-12);
  for (int k = 0; k < max_escalations; ++k, j *= 10.0) {
    if (j > 1e-6) break;
    if (try_llt(m.entries(), j * scale, &L)) return L;
  }
  throw FactorizationFailed("Cholesky failed after jitter escalation");
}

MatrixXd spd_solve(const SpdMatrix& m, const MatrixXd& rhs) {
  if (rhs.rows() != m.dim()) throw DimensionMismatch("solve rhs rows");
  const double scale = std::max(m.entries().diagonal().maxCoeff(), 1.0);
  auto attempt = [&](double jitter_abs, MatrixXd* out) {
    MatrixXd shifted = m.entries();
    shifted.diagonal().array() += jitter_abs;
    Eigen::LLT<MatrixXd> llt(shifted);
    if (llt.info() != Eigen::Success) return false;
    *out = llt.solve(rhs);
    return out->allFinite();
  };
  MatrixXd x;
  if (attempt(0.0, &x)) return x;
  for (double j = 1e-12; j <= 1e-6 * 1.0000001; j *= 10.0) {
    if (attempt(j * scale, &x)) return x;
  }
  throw SingularBlock("block not invertible after jitter escalation");
}

SpdMatrix schur_complement(const SpdMatrix& m, Eigen::Index k) {
  const Eigen::Index d = m.dim();
  if (k < 1 || k >= d) throw InvalidInput("schur block size out of range");
  const MatrixXd& a = m.entries();
  const MatrixXd a11 = a.topLeftCorner(k, k);
  const MatrixXd a12 = a.topRightCorner(k, d - k);
  const MatrixXd a22 = a.bottomRightCorner(d - k, d - k);
  const SpdMatrix lead = SpdMatrix::trusted(a11, m.sym_tol(), m.eig_floor());
  const MatrixXd x = spd_solve(lead, a12);  // A11^{-1} A12
  MatrixXd s = a22 - a12.transpose() * x;
  return SpdMatrix::trusted(s, m.sym_tol(), m.eig_floor());
}

MatrixXd polar_unitary(const MatrixXd& m, const PolarOptions& opts) {
  if (m.rows() != m.cols()) throw DimensionMismatch("polar needs square input");
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorXd& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  if (opts.strict && (smax == 0.0 || sv(sv.size() - 1) < opts.rank_tol * smax)) {
    throw RankDeficient("smallest singular value below threshold");
  }
  // Zero singular values contribute +1 directions: U V^T already realizes
  // that choice since Eigen returns full orthogonal factors.
  return svd.matrixU() * svd.matrixV().transpose();
}

SpdMatrix pseudo_inverse(const SpdMatrix& m) {
  EigenFactorization f = m.factorize();
  VectorXd inv = VectorXd::Zero(f.eigenvalues.size());
  for (Eigen::Index i = 0; i < f.eigenvalues.size(); ++i) {
    if (f.eigenvalues(i) > 0) inv(i) = 1.0 / f.eigenvalues(i);
  }
  MatrixXd p = f.eigenvectors * inv.asDiagonal() * f.eigenvectors.transpose();
  return SpdMatrix::trusted(p, m.sym_tol(), m.eig_floor());
}

}  // namespace sot
