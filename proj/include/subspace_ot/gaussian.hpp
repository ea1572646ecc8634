#pragma once

#include <cstdint>
#include <optional>

#include "subspace_ot/spd.hpp"
#include "subspace_ot/subspace.hpp"

namespace sot {

struct Gaussian {
  VectorXd mean;
  SpdMatrix cov;

  Gaussian() = default;
  Gaussian(VectorXd m, SpdMatrix c);
  static Gaussian centered(SpdMatrix c);

  Eigen::Index dim() const { return cov.dim(); }
};

// Affine map x -> target_mean + T (x - source_mean). The matrix acts on
// centered coordinates, following the centering reduction: quadratic
// transport between Gaussians splits into a mean translation plus a
// linear map between the centered parts.
struct LinearTransport {
  VectorXd source_mean;
  VectorXd target_mean;
  MatrixXd matrix;

  VectorXd apply(const VectorXd& x) const {
    return target_mean + matrix * (x - source_mean);
  }
  // Push-forward of a Gaussian through the affine map.
  Gaussian push_forward(const Gaussian& g) const;

  static LinearTransport identity(Eigen::Index d);
};

// Joint Gaussian on R^{2d} coupling a source and a target Gaussian; the
// covariance is PSD but typically singular (the coupling concentrates on
// a lower-dimensional affine subspace).
struct GaussianCoupling {
  VectorXd mean;   // stacked [m_mu; m_nu]
  SpdMatrix sigma; // [[A, C], [C^T, B]]

  Eigen::Index dim() const { return sigma.dim() / 2; }
  MatrixXd source_block() const;
  MatrixXd target_block() const;
  MatrixXd cross_block() const;

  // Transport cost of the coupling: E||X - Y||^2 + mean displacement.
  double cost() const;

  // Draws n samples (rows: [x^T y^T]) from the possibly degenerate
  // Gaussian through the eigendecomposition of sigma.
  MatrixXd sample(Eigen::Index n, std::uint64_t seed) const;
};

// Re-weighted quadratic metric d^2_P(x,y) = (x-y)^T P (x-y) with
// P = V_E V_E^T + eps V_perp V_perp^T.
struct WeightedMetric {
  Subspace basis;
  double epsilon;

  WeightedMetric(Subspace b, double eps);

  MatrixXd matrix() const;       // P
  MatrixXd sqrt_matrix() const;  // P^{1/2}
  MatrixXd inv_sqrt_matrix() const;
};

// Squared Bures metric tr A + tr B - 2 tr (A^{1/2} B A^{1/2})^{1/2},
// clamped at zero from below.
double bures(const SpdMatrix& a, const SpdMatrix& b);

// ||m_mu - m_nu||^2 + bures(cov_mu, cov_nu).
double wasserstein2_gaussian(const Gaussian& mu, const Gaussian& nu);

// Optimal (Monge) map between Gaussians:
// T = A^{-1/2} (A^{1/2} B A^{1/2})^{1/2} A^{-1/2}. The source covariance
// must be invertible; when `regularize` is set a jitter escalation is
// applied before giving up with SingularSource.
struct MongeOptions {
  bool regularize = true;
};
LinearTransport monge_map(const Gaussian& mu, const Gaussian& nu,
                          const MongeOptions& opts = {});
// Centered matrix-only variant used by the block formulas.
MatrixXd monge_matrix(const SpdMatrix& a, const SpdMatrix& b,
                      const MongeOptions& opts = {});

// tr A + tr B - tr(T A + A T^T) plus the squared mean displacement.
// Warns on stderr when T does not push A onto B within tolerance.
double transport_cost(const LinearTransport& t, const SpdMatrix& a,
                      const SpdMatrix& b);

// Knothe-Rosenblatt triangular map T = L_B L_A^{-1} with marginalization
// on x_1 first (lower-triangular Jacobian). Requires nonsingular A.
LinearTransport kr_map(const Gaussian& mu, const Gaussian& nu);

// Frobenius distance between the Cholesky factors; the square root of the
// KR transport cost, a metric on PSD matrices.
double kr_distance(const SpdMatrix& a, const SpdMatrix& b);

// Monge-Knothe map through E: optimal on E, optimally coupled
// conditionals on the complement. Lower block-triangular in the
// (V_E, V_perp) basis; returned in ambient coordinates.
LinearTransport mk_map(const Gaussian& mu, const Gaussian& nu,
                       const Subspace& e, const MongeOptions& opts = {});

// Monge-Independent coupling through E: optimal on E, independent
// conditionals. Returns the degenerate Gaussian on R^{2d}.
GaussianCoupling mi_coupling(const Gaussian& mu, const Gaussian& nu,
                             const Subspace& e, const MongeOptions& opts = {});

// Optimal map for the re-weighted metric:
// T_eps = P^{-1/2} T^{(P^{1/2} A P^{1/2})(P^{1/2} B P^{1/2})} P^{1/2}.
LinearTransport weighted_monge_map(const Gaussian& mu, const Gaussian& nu,
                                   const WeightedMetric& metric,
                                   const MongeOptions& opts = {});

// Displacement interpolation under ((1-t) Id + t T): Gaussian with mean
// (1-t) m_mu + t T(m_mu) and covariance M_t A M_t^T.
Gaussian interpolate(const LinearTransport& t, const Gaussian& mu, double s);

// Draws n samples (rows) from a Gaussian.
MatrixXd sample_gaussian(const Gaussian& g, Eigen::Index n,
                         std::uint64_t seed);

}  // namespace sot
