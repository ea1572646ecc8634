#pragma once

#include <cstdint>
#include <vector>

#include "subspace_ot/discrete.hpp"
#include "subspace_ot/gaussian.hpp"
#include "subspace_ot/subspace.hpp"

namespace sot {

// Marginal of a Gaussian on E: mean V_E^T m, covariance V_E^T A V_E.
Gaussian project_gaussian(const Gaussian& mu, const Subspace& e);

// Gaussian conditional structure on E, in (V_E, V_perp) coordinates:
// the law of x_perp given x_E has mean regression_matrix * x_E (centered
// convention) and covariance equal to the Schur complement of A_E.
struct GaussianDisintegration {
  SpdMatrix conditional_cov;   // (d-k) x (d-k)
  MatrixXd regression_matrix;  // (d-k) x k
};
GaussianDisintegration disintegrate_gaussian(const Gaussian& mu,
                                             const Subspace& e);

// Monge-Knothe transport cost between V^T A V and V^T B V with E the
// span of the first k canonical axes.
double mk_loss(const SpdMatrix& a, const SpdMatrix& b, const MatrixXd& v,
               Eigen::Index k);

struct SelectionConfig {
  Eigen::Index k = 1;
  double eta = 0.1;          // initial step size, reset every iteration
  int max_iters = 200;
  double rel_tol = 1e-8;     // stopping: |dL| <= rel_tol * (1 + L)
  double fd_step = 1e-5;     // scaled by (1 + ||V||_F)
  std::uint64_t seed = 0;
  int restarts = 1;          // restart 0 is Polar(AB), the rest random
  int max_backtracks = 30;
  unsigned threads = 1;
};

struct SelectionResult {
  Subspace subspace;
  MatrixXd basis;                   // final V, orthogonal
  std::vector<double> loss_history; // post-retraction losses, nonincreasing
  double final_loss = 0.0;
  int restart_index = 0;            // which restart won
};

// Projected gradient descent on the orthogonal group for the minimal
// Monge-Knothe subspace: init Polar(AB), finite-difference gradient,
// polar retraction, backtracking on the step size. Steps are accepted
// only when the retracted loss does not increase.
SelectionResult select_subspace(const SpdMatrix& a, const SpdMatrix& b,
                                const SelectionConfig& cfg);

// Top-k eigenvector subspace. Eigenvector signs are fixed by making the
// largest-magnitude entry positive; groups of equal eigenvalues are
// ordered by the axis index of that entry.
Subspace pca_subspace(const SpdMatrix& cov, Eigen::Index k);
Subspace pca_subspace(const DiscreteMeasure& samples, Eigen::Index k);

}  // namespace sot
