#include "subspace_ot/gaussian.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "subspace_ot/util.hpp"

namespace sot {

namespace {

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": " << a << " vs " << b;
    throw DimensionMismatch(os.str());
  }
}

// Sum of square roots of the (clipped) eigenvalues of a symmetric PSD
// product that may carry small negative noise.
double trace_sqrt(const MatrixXd& m, double floor_rel) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw FactorizationFailed("eigendecomposition in trace_sqrt");
  }
  const VectorXd& ev = solver.eigenvalues();
  const double floor = floor_rel * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > floor) acc += std::sqrt(ev(i));
  }
  return acc;
}

SpdMatrix inv_sqrt_with_policy(const SpdMatrix& a, const MongeOptions& opts) {
  try {
    return inv_sqrtm(a, 0.0);
  } catch (const SingularInput&) {
    if (!opts.regularize) throw;
  }
  const double lmax =
      std::max(a.entries().cwiseAbs().maxCoeff(), 1e-300);
  for (double reg = 1e-12 * lmax; reg <= 1e-6 * lmax * 1.0000001;
       reg *= 10.0) {
    try {
      return inv_sqrtm(a, reg);
    } catch (const SingularInput&) {
    }
  }
  throw SingularSource("covariance not invertible after regularization");
}

}  // namespace

Gaussian::Gaussian(VectorXd m, SpdMatrix c) : mean(std::move(m)), cov(std::move(c)) {
  require_same_dim(mean.size(), cov.dim(), "gaussian mean/cov");
  if (!mean.allFinite()) throw InvalidInput("gaussian mean not finite");
}

Gaussian Gaussian::centered(SpdMatrix c) {
  const Eigen::Index d = c.dim();
  return Gaussian(VectorXd::Zero(d), std::move(c));
}

Gaussian LinearTransport::push_forward(const Gaussian& g) const {
  MatrixXd cov = matrix * g.cov.entries() * matrix.transpose();
  return Gaussian(apply(g.mean), SpdMatrix::trusted(cov));
}

LinearTransport LinearTransport::identity(Eigen::Index d) {
  return LinearTransport{VectorXd::Zero(d), VectorXd::Zero(d),
                         MatrixXd::Identity(d, d)};
}

MatrixXd GaussianCoupling::source_block() const {
  const Eigen::Index d = dim();
  return sigma.entries().topLeftCorner(d, d);
}

MatrixXd GaussianCoupling::target_block() const {
  const Eigen::Index d = dim();
  return sigma.entries().bottomRightCorner(d, d);
}

MatrixXd GaussianCoupling::cross_block() const {
  const Eigen::Index d = dim();
  return sigma.entries().topRightCorner(d, d);
}

double GaussianCoupling::cost() const {
  const Eigen::Index d = dim();
  const double mean_sq = (mean.head(d) - mean.tail(d)).squaredNorm();
  return mean_sq + source_block().trace() + target_block().trace() -
         2.0 * cross_block().trace();
}

MatrixXd GaussianCoupling::sample(Eigen::Index n, std::uint64_t seed) const {
  EigenFactorization f = sigma.factorize();
  const Eigen::Index d2 = sigma.dim();
  MatrixXd out(n, d2);
  auto rng = make_rng(seed);
  std::normal_distribution<double> normal;
  const VectorXd roots = f.eigenvalues.cwiseSqrt();
  for (Eigen::Index i = 0; i < n; ++i) {
    VectorXd z(d2);
    for (Eigen::Index j = 0; j < d2; ++j) z(j) = normal(rng);
    out.row(i) = (mean + f.eigenvectors * roots.cwiseProduct(z)).transpose();
  }
  return out;
}

WeightedMetric::WeightedMetric(Subspace b, double eps)
    : basis(std::move(b)), epsilon(eps) {
  if (!(eps > 0)) throw InvalidInput("weighted metric needs epsilon > 0");
}

MatrixXd WeightedMetric::matrix() const {
  return basis.projector() +
         epsilon * basis.v_perp() * basis.v_perp().transpose();
}

MatrixXd WeightedMetric::sqrt_matrix() const {
  return basis.projector() +
         std::sqrt(epsilon) * basis.v_perp() * basis.v_perp().transpose();
}

MatrixXd WeightedMetric::inv_sqrt_matrix() const {
  return basis.projector() +
         (1.0 / std::sqrt(epsilon)) * basis.v_perp() * basis.v_perp().transpose();
}

double bures(const SpdMatrix& a, const SpdMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "bures");
  const SpdMatrix root = sqrtm(a);
  const MatrixXd mid = root.entries() * b.entries() * root.entries();
  const double cross = trace_sqrt(mid, a.eig_floor());
  return std::max(0.0, a.trace() + b.trace() - 2.0 * cross);
}

double wasserstein2_gaussian(const Gaussian& mu, const Gaussian& nu) {
  require_same_dim(mu.dim(), nu.dim(), "wasserstein2_gaussian");
  return (mu.mean - nu.mean).squaredNorm() + bures(mu.cov, nu.cov);
}

MatrixXd monge_matrix(const SpdMatrix& a, const SpdMatrix& b,
                      const MongeOptions& opts) {
  require_same_dim(a.dim(), b.dim(), "monge_matrix");
  // Zero-to-zero transport (point mass at the origin on both sides) is the
  // identity; the regularization loop cannot produce it from a zero scale.
  if (a.entries().cwiseAbs().maxCoeff() == 0.0 &&
      b.entries().cwiseAbs().maxCoeff() == 0.0) {
    return MatrixXd::Identity(a.dim(), a.dim());
  }
  const SpdMatrix a_inv_root = inv_sqrt_with_policy(a, opts);
  const SpdMatrix a_root = sqrtm(a);
  const MatrixXd mid = a_root.entries() * b.entries() * a_root.entries();
  // The product spectrum can be far flatter than either factor's (its tail
  // scales like the product of the tails), so inherit the looser floor.
  const double mid_floor = std::min(a.eig_floor(), b.eig_floor());
  const SpdMatrix mid_root =
      sqrtm(SpdMatrix::trusted(mid, a.sym_tol(), mid_floor));
  MatrixXd t =
      a_inv_root.entries() * mid_root.entries() * a_inv_root.entries();
  return 0.5 * (t + t.transpose());
}

LinearTransport monge_map(const Gaussian& mu, const Gaussian& nu,
                          const MongeOptions& opts) {
  return LinearTransport{mu.mean, nu.mean,
                         monge_matrix(mu.cov, nu.cov, opts)};
}

double transport_cost(const LinearTransport& t, const SpdMatrix& a,
                      const SpdMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "transport_cost");
  require_same_dim(t.matrix.rows(), a.dim(), "transport_cost map");
  const MatrixXd push = t.matrix * a.entries() * t.matrix.transpose();
  const double push_err = (push - b.entries()).norm();
  if (push_err > 1e-6 * (1.0 + b.entries().norm())) {
    std::fprintf(stderr,
                 "subspace_ot: transport_cost: map does not push source onto "
                 "target (|TAT^T - B| = %.3e)\n",
                 push_err);
  }
  const double cov_part =
      a.trace() + b.trace() - 2.0 * (t.matrix * a.entries()).trace();
  return (t.target_mean - t.source_mean).squaredNorm() + cov_part;
}

LinearTransport kr_map(const Gaussian& mu, const Gaussian& nu) {
  require_same_dim(mu.dim(), nu.dim(), "kr_map");
  MatrixXd l_a;
  try {
    l_a = cholesky_lower(mu.cov, 0.0, /*max_escalations=*/0);
  } catch (const FactorizationFailed&) {
    throw SingularSource("KR requires a nonsingular source covariance");
  }
  const MatrixXd l_b = cholesky_lower(nu.cov);
  // T = L_B L_A^{-1}, solved as T L_A = L_B.
  MatrixXd t = l_a.transpose()
                   .triangularView<Eigen::Upper>()
                   .solve(l_b.transpose())
                   .transpose();
  return LinearTransport{mu.mean, nu.mean, std::move(t)};
}

double kr_distance(const SpdMatrix& a, const SpdMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "kr_distance");
  const MatrixXd l_a = cholesky_lower(a);
  const MatrixXd l_b = cholesky_lower(b);
  return (l_a - l_b).norm();
}

LinearTransport mk_map(const Gaussian& mu, const Gaussian& nu,
                       const Subspace& e, const MongeOptions& opts) {
  const Eigen::Index d = mu.dim();
  require_same_dim(d, nu.dim(), "mk_map");
  require_same_dim(d, e.dim(), "mk_map subspace");
  const Eigen::Index k = e.k();
  const MatrixXd& v = e.basis_full();
  const MatrixXd a = v.transpose() * mu.cov.entries() * v;
  const MatrixXd b = v.transpose() * nu.cov.entries() * v;

  MatrixXd t_local;
  if (k == d) {
    t_local = monge_matrix(SpdMatrix::trusted(a), SpdMatrix::trusted(b), opts);
  } else {
    const SpdMatrix a_e = SpdMatrix::trusted(a.topLeftCorner(k, k));
    const SpdMatrix b_e = SpdMatrix::trusted(b.topLeftCorner(k, k));
    const MatrixXd a_c = a.topRightCorner(k, d - k);
    const MatrixXd b_c = b.topRightCorner(k, d - k);
    const MatrixXd t_e = monge_matrix(a_e, b_e, opts);

    const SpdMatrix schur_a = schur_complement(SpdMatrix::trusted(a), k);
    const SpdMatrix schur_b = schur_complement(SpdMatrix::trusted(b), k);
    const MatrixXd t_schur = monge_matrix(schur_a, schur_b, opts);

    // [B_c^T T_E^{-1} - T_S A_c^T] A_E^{-1}
    const MatrixXd te_inv_bct =
        spd_solve(SpdMatrix::trusted(t_e), b_c);  // T_E^{-1} B_c
    const MatrixXd num = te_inv_bct.transpose() - t_schur * a_c.transpose();
    const MatrixXd lower_left =
        spd_solve(a_e, num.transpose()).transpose();  // num A_E^{-1}

    t_local = MatrixXd::Zero(d, d);
    t_local.topLeftCorner(k, k) = t_e;
    t_local.bottomLeftCorner(d - k, k) = lower_left;
    t_local.bottomRightCorner(d - k, d - k) = t_schur;
  }
  return LinearTransport{mu.mean, nu.mean, v * t_local * v.transpose()};
}

GaussianCoupling mi_coupling(const Gaussian& mu, const Gaussian& nu,
                             const Subspace& e, const MongeOptions& opts) {
  const Eigen::Index d = mu.dim();
  require_same_dim(d, nu.dim(), "mi_coupling");
  require_same_dim(d, e.dim(), "mi_coupling subspace");
  const Eigen::Index k = e.k();
  const MatrixXd v_e = e.v_e();
  const MatrixXd v_p = e.v_perp();
  const MatrixXd& a = mu.cov.entries();
  const MatrixXd& b = nu.cov.entries();

  const SpdMatrix a_e = SpdMatrix::trusted(v_e.transpose() * a * v_e);
  const SpdMatrix b_e = SpdMatrix::trusted(v_e.transpose() * b * v_e);
  const MatrixXd a_c = v_e.transpose() * a * v_p;  // k x (d-k)
  const MatrixXd b_c = v_e.transpose() * b * v_p;
  const MatrixXd t_e = monge_matrix(a_e, b_e, opts);

  const MatrixXd left = v_e * a_e.entries() + v_p * a_c.transpose();
  MatrixXd right = v_e.transpose();
  if (k < d) {
    right += spd_solve(b_e, b_c) * v_p.transpose();
  }
  const MatrixXd c = left * t_e * right;

  MatrixXd sigma(2 * d, 2 * d);
  sigma.topLeftCorner(d, d) = a;
  sigma.topRightCorner(d, d) = c;
  sigma.bottomLeftCorner(d, d) = c.transpose();
  sigma.bottomRightCorner(d, d) = b;

  VectorXd mean(2 * d);
  mean << mu.mean, nu.mean;
  // The coupling covariance is singular by construction; use a floor wide
  // enough to absorb the roundoff of the block assembly.
  return GaussianCoupling{std::move(mean),
                          SpdMatrix::trusted(sigma, SpdMatrix::kDefaultSymTol,
                                             1e-8)};
}

namespace {

using MatrixXld =
    Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXld = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

MatrixXld sqrt_ld(const MatrixXld& m, bool invert) {
  Eigen::SelfAdjointEigenSolver<MatrixXld> solver(m);
  if (solver.info() != Eigen::Success) {
    throw FactorizationFailed("extended-precision eigendecomposition");
  }
  const VectorXld& ev = solver.eigenvalues();
  const long double lmax = ev(ev.size() - 1);
  if (!(lmax > 0)) throw SingularInput("zero matrix in weighted transport");
  const long double floor = 1e-17L * lmax;
  VectorXld mapped(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const long double v = ev(i) < floor ? 0.0L : ev(i);
    if (invert) {
      if (v <= 0) {
        throw SingularSource("weighted covariance is numerically singular");
      }
      mapped(i) = 1.0L / std::sqrt(v);
    } else {
      mapped(i) = std::sqrt(v);
    }
  }
  return solver.eigenvectors() * mapped.asDiagonal() *
         solver.eigenvectors().transpose();
}

}  // namespace

LinearTransport weighted_monge_map(const Gaussian& mu, const Gaussian& nu,
                                   const WeightedMetric& metric,
                                   const MongeOptions& opts) {
  (void)opts;
  const Eigen::Index d = mu.dim();
  require_same_dim(d, nu.dim(), "weighted_monge_map");
  require_same_dim(d, metric.basis.dim(), "weighted_monge_map metric");
  // Small metric weights squash the complement spectrum by eps and the
  // intermediate product of the Monge formula by eps^2, which double
  // eigensolves cannot resolve near eps = 1e-6. The whole change of
  // variables runs in extended precision instead.
  const MatrixXld p_root = metric.sqrt_matrix().cast<long double>();
  const MatrixXld p_inv_root = metric.inv_sqrt_matrix().cast<long double>();
  const MatrixXld a = mu.cov.entries().cast<long double>();
  const MatrixXld b = nu.cov.entries().cast<long double>();
  const MatrixXld a_w = p_root * a * p_root;
  const MatrixXld b_w = p_root * b * p_root;
  const MatrixXld a_root = sqrt_ld(a_w, false);
  const MatrixXld a_inv_root = sqrt_ld(a_w, true);
  const MatrixXld mid_root = sqrt_ld(a_root * b_w * a_root, false);
  MatrixXld t_w = a_inv_root * mid_root * a_inv_root;
  t_w = 0.5L * (t_w + t_w.transpose()).eval();
  const MatrixXld t = p_inv_root * t_w * p_root;
  return LinearTransport{mu.mean, nu.mean, t.cast<double>()};
}

Gaussian interpolate(const LinearTransport& t, const Gaussian& mu, double s) {
  if (s < 0.0 || s > 1.0) throw InvalidInput("interpolation time outside [0,1]");
  const Eigen::Index d = mu.dim();
  const MatrixXd m_s = (1.0 - s) * MatrixXd::Identity(d, d) + s * t.matrix;
  const VectorXd mean = (1.0 - s) * mu.mean + s * t.apply(mu.mean);
  MatrixXd cov = m_s * mu.cov.entries() * m_s.transpose();
  return Gaussian(mean, SpdMatrix::trusted(cov));
}

MatrixXd sample_gaussian(const Gaussian& g, Eigen::Index n,
                         std::uint64_t seed) {
  EigenFactorization f = g.cov.factorize();
  const Eigen::Index d = g.dim();
  const VectorXd roots = f.eigenvalues.cwiseSqrt();
  MatrixXd out(n, d);
  auto rng = make_rng(seed);
  std::normal_distribution<double> normal;
  for (Eigen::Index i = 0; i < n; ++i) {
    VectorXd z(d);
    for (Eigen::Index j = 0; j < d; ++j) z(j) = normal(rng);
    out.row(i) = (g.mean + f.eigenvectors * roots.cwiseProduct(z)).transpose();
  }
  return out;
}

}  // namespace sot
