#include "subspace_ot/subspace_select.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>

#include "subspace_ot/util.hpp"

namespace sot {

Gaussian project_gaussian(const Gaussian& mu, const Subspace& e) {
  if (mu.dim() != e.dim()) throw DimensionMismatch("project_gaussian");
  const MatrixXd v_e = e.v_e();
  MatrixXd cov = v_e.transpose() * mu.cov.entries() * v_e;
  return Gaussian(v_e.transpose() * mu.mean, SpdMatrix::trusted(cov));
}

GaussianDisintegration disintegrate_gaussian(const Gaussian& mu,
                                             const Subspace& e) {
  if (mu.dim() != e.dim()) throw DimensionMismatch("disintegrate_gaussian");
  const Eigen::Index d = mu.dim();
  const Eigen::Index k = e.k();
  if (k == d) throw InvalidInput("disintegration needs k < d");
  const MatrixXd& v = e.basis_full();
  const MatrixXd local = v.transpose() * mu.cov.entries() * v;
  const SpdMatrix a_e = SpdMatrix::trusted(local.topLeftCorner(k, k));
  const MatrixXd a_c = local.topRightCorner(k, d - k);
  GaussianDisintegration out;
  out.conditional_cov = schur_complement(SpdMatrix::trusted(local), k);
  out.regression_matrix = spd_solve(a_e, a_c).transpose();  // A_c^T A_E^{-1}
  return out;
}

double mk_loss(const SpdMatrix& a, const SpdMatrix& b, const MatrixXd& v,
               Eigen::Index k) {
  const Eigen::Index d = a.dim();
  if (b.dim() != d || v.rows() != d || v.cols() != d) {
    throw DimensionMismatch("mk_loss");
  }
  const SpdMatrix ar = SpdMatrix::trusted(v.transpose() * a.entries() * v);
  const SpdMatrix br = SpdMatrix::trusted(v.transpose() * b.entries() * v);
  const Subspace axes = Subspace::canonical(d, k);
  const LinearTransport t =
      mk_map(Gaussian::centered(ar), Gaussian::centered(br), axes);
  return transport_cost(t, ar, br);
}

namespace {

MatrixXd random_orthogonal(Eigen::Index d, std::mt19937_64* rng) {
  std::normal_distribution<double> normal;
  MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = normal(*rng);
  }
  return polar_unitary(g);
}

struct DescentOutcome {
  MatrixXd basis;
  std::vector<double> history;
  double final_loss = 0.0;
};

DescentOutcome run_descent(const SpdMatrix& a, const SpdMatrix& b,
                           const SelectionConfig& cfg, MatrixXd v) {
  const Eigen::Index d = a.dim();
  auto loss_at = [&](const MatrixXd& w) { return mk_loss(a, b, w, cfg.k); };

  DescentOutcome out;
  double loss = loss_at(v);
  if (!std::isfinite(loss)) {
    throw NonFiniteLoss("initial Monge-Knothe loss is not finite");
  }
  out.history.push_back(loss);

  MatrixXd grad(d, d);
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    const double h = cfg.fd_step * (1.0 + v.norm());
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        MatrixXd w = v;
        w(i, j) = v(i, j) + h;
        const double up = loss_at(w);
        w(i, j) = v(i, j) - h;
        const double down = loss_at(w);
        grad(i, j) = (up - down) / (2.0 * h);
      }
    }
    if (!grad.allFinite()) {
      std::ostringstream os;
      os << "gradient not finite at iteration " << iter;
      throw NonFiniteLoss(os.str());
    }

    double eta = cfg.eta;
    bool accepted = false;
    MatrixXd next;
    double next_loss = 0.0;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt, eta *= 0.5) {
      next = polar_unitary(v - eta * grad);
      next_loss = loss_at(next);
      if (std::isfinite(next_loss) && next_loss <= loss) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // no descent direction left at this scale

    v = next;
    out.history.push_back(next_loss);
    const bool converged =
        std::abs(loss - next_loss) <= cfg.rel_tol * (1.0 + std::abs(loss));
    loss = next_loss;
    if (!std::isfinite(loss)) {
      std::ostringstream os;
      os << "loss not finite at iteration " << iter;
      throw NonFiniteLoss(os.str());
    }
    if (converged) break;
  }
  out.basis = std::move(v);
  out.final_loss = loss;
  return out;
}

}  // namespace

SelectionResult select_subspace(const SpdMatrix& a, const SpdMatrix& b,
                                const SelectionConfig& cfg) {
  const Eigen::Index d = a.dim();
  if (b.dim() != d) throw DimensionMismatch("select_subspace");
  if (cfg.k < 1 || cfg.k > d) throw InvalidInput("k outside [1, d]");
  if (!(cfg.eta > 0)) throw InvalidInput("eta must be positive");
  if (!(cfg.fd_step > 0)) throw InvalidInput("fd_step must be positive");
  if (cfg.restarts < 1) throw InvalidInput("restarts must be >= 1");

  std::vector<DescentOutcome> outcomes(cfg.restarts);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  parallel_for(static_cast<std::size_t>(cfg.restarts), cfg.threads,
               [&](std::size_t r) {
                 try {
                   MatrixXd init;
                   if (r == 0) {
                     init = polar_unitary(a.entries() * b.entries());
                   } else {
                     auto rng = make_rng(cfg.seed, r);
                     init = random_orthogonal(d, &rng);
                   }
                   outcomes[r] = run_descent(a, b, cfg, std::move(init));
                 } catch (...) {
                   std::lock_guard<std::mutex> lock(failure_mutex);
                   if (!failure) failure = std::current_exception();
                 }
               });
  if (failure) std::rethrow_exception(failure);

  int best = 0;
  for (int r = 1; r < cfg.restarts; ++r) {
    if (outcomes[r].final_loss < outcomes[best].final_loss) best = r;
  }
  SelectionResult res{Subspace(outcomes[best].basis, cfg.k),
                      outcomes[best].basis,
                      std::move(outcomes[best].history),
                      outcomes[best].final_loss, best};
  return res;
}

namespace {

Subspace pca_from_factorization(EigenFactorization f, Eigen::Index k) {
  const Eigen::Index d = f.eigenvalues.size();
  if (k < 1 || k > d) throw InvalidInput("k outside [1, d]");
  const double lmax = f.eigenvalues(0);
  if (lmax <= 0) throw DegenerateData("covariance is zero");

  // Deterministic sign: largest-magnitude entry made positive.
  std::vector<int> anchor(d);
  for (Eigen::Index c = 0; c < d; ++c) {
    Eigen::Index best = 0;
    f.eigenvectors.col(c).cwiseAbs().maxCoeff(&best);
    anchor[c] = static_cast<int>(best);
    if (f.eigenvectors(best, c) < 0) f.eigenvectors.col(c) *= -1.0;
  }
  // Groups of (numerically) equal eigenvalues keep a stable order by the
  // axis index of their anchor entry.
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  const double tie_tol = 1e-8 * (1.0 + lmax);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    if (f.eigenvalues(x) > f.eigenvalues(y) + tie_tol) return true;
    if (f.eigenvalues(y) > f.eigenvalues(x) + tie_tol) return false;
    return anchor[x] < anchor[y];
  });
  MatrixXd basis(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    basis.col(c) = f.eigenvectors.col(order[c]);
  }
  return Subspace(std::move(basis), k);
}

}  // namespace

Subspace pca_subspace(const SpdMatrix& cov, Eigen::Index k) {
  return pca_from_factorization(cov.factorize(), k);
}

Subspace pca_subspace(const DiscreteMeasure& samples, Eigen::Index k) {
  if (samples.size() < 2) {
    throw TooFewSamples("need at least 2 samples for a covariance");
  }
  const VectorXd mean = samples.points.transpose() * samples.weights;
  MatrixXd centered = samples.points.rowwise() - mean.transpose();
  MatrixXd cov = centered.transpose() *
                 samples.weights.asDiagonal() * centered;
  return pca_subspace(SpdMatrix::trusted(cov), k);
}

}  // namespace sot
