#pragma once

#include <random>

#include "subspace_ot/spd.hpp"
#include "subspace_ot/util.hpp"

namespace sot::testing {

// Random SPD matrix with eigenvalues log-uniform in [1/sqrt(cond),
// sqrt(cond)], orthogonal eigenbasis from a Gaussian polar factor.
inline SpdMatrix random_spd(std::mt19937_64* rng, Eigen::Index d,
                            double cond = 50.0) {
  std::normal_distribution<double> normal;
  MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = normal(*rng);
  }
  const MatrixXd q = polar_unitary(g);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  VectorXd ev(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    ev(i) = std::pow(cond, unif(*rng));
  }
  return SpdMatrix::trusted(q * ev.asDiagonal() * q.transpose());
}

inline MatrixXd random_orthogonal(std::mt19937_64* rng, Eigen::Index d) {
  std::normal_distribution<double> normal;
  MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = normal(*rng);
  }
  return polar_unitary(g);
}

inline MatrixXd matrix2(double a, double b, double c, double d) {
  MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace sot::testing
