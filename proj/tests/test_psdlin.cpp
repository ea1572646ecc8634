#include <doctest.h>

#include <cmath>

#include "subspace_ot/spd.hpp"
#include "test_support.hpp"

using namespace sot;
using sot::testing::matrix2;
using sot::testing::random_spd;

TEST_CASE("spd construction enforces symmetry") {
  MatrixXd bad = matrix2(1.0, 0.5, -0.5, 1.0);
  CHECK_THROWS_AS(SpdMatrix{bad}, AsymmetricInput);
  // asymmetry below tolerance is symmetrized away
  MatrixXd ok = matrix2(1.0, 0.5 + 1e-12, 0.5, 1.0);
  SpdMatrix m(ok);
  CHECK(m.entries()(0, 1) == m.entries()(1, 0));
}

TEST_CASE("spd construction rejects indefinite input") {
  CHECK_THROWS_AS(SpdMatrix{matrix2(1.0, 2.0, 2.0, 1.0)}, IndefiniteInput);
  // tiny negative eigenvalue within the floor is accepted and clipped
  MatrixXd nearly = matrix2(1.0, 0.0, 0.0, -1e-14);
  SpdMatrix m(nearly);
  CHECK(m.factorize().eigenvalues.minCoeff() == 0.0);
}

TEST_CASE("sqrtm on identity and diagonals") {
  CHECK((sqrtm(SpdMatrix::identity(3)).entries() - MatrixXd::Identity(3, 3))
            .norm() == doctest::Approx(0.0));
  SpdMatrix d(matrix2(4.0, 0.0, 0.0, 9.0));
  const MatrixXd s = sqrtm(d).entries();
  CHECK(s(0, 0) == doctest::Approx(2.0));
  CHECK(s(1, 1) == doctest::Approx(3.0));
  CHECK(s(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("sqrtm squares back on a full 2x2") {
  // eigenvalues 3 and 1 with the +-45 degree eigenbasis
  SpdMatrix m(matrix2(2.0, 1.0, 1.0, 2.0));
  const MatrixXd s = sqrtm(m).entries();
  CHECK((s * s - m.entries()).norm() <= 1e-10);
  const double e1 = std::sqrt(3.0), e2 = 1.0;
  CHECK(s(0, 0) == doctest::Approx(0.5 * (e1 + e2)));
  CHECK(s(0, 1) == doctest::Approx(0.5 * (e1 - e2)));
}

TEST_CASE("inv_sqrtm closed forms") {
  SpdMatrix d(matrix2(4.0, 0.0, 0.0, 9.0));
  const MatrixXd s = inv_sqrtm(d).entries();
  CHECK(s(0, 0) == doctest::Approx(0.5));
  CHECK(s(1, 1) == doctest::Approx(1.0 / 3.0));
  CHECK((inv_sqrtm(SpdMatrix::identity(2)).entries() -
         MatrixXd::Identity(2, 2))
            .norm() <= 1e-12);

  SpdMatrix singular(matrix2(1.0, 0.0, 0.0, 0.0));
  const MatrixXd r = inv_sqrtm(singular, 1e-6).entries();
  CHECK(r(0, 0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r(1, 1) == doctest::Approx(1000.0).epsilon(1e-3));
  CHECK_THROWS_AS(inv_sqrtm(singular, 0.0), SingularInput);
}

TEST_CASE("cholesky_lower hand example") {
  SpdMatrix m(matrix2(4.0, 2.0, 2.0, 5.0));
  const MatrixXd l = cholesky_lower(m);
  CHECK(l(0, 0) == doctest::Approx(2.0));
  CHECK(l(1, 0) == doctest::Approx(1.0));
  CHECK(l(1, 1) == doctest::Approx(2.0));
  CHECK(l(0, 1) == 0.0);

  CHECK((cholesky_lower(SpdMatrix::identity(4)) - MatrixXd::Identity(4, 4))
            .norm() <= 1e-14);
  SpdMatrix one(MatrixXd::Constant(1, 1, 9.0));
  CHECK(cholesky_lower(one)(0, 0) == doctest::Approx(3.0));
}

TEST_CASE("cholesky_lower escalation and failure") {
  SpdMatrix singular(matrix2(1.0, 0.0, 0.0, 0.0));
  // strict mode refuses, escalation succeeds
  CHECK_THROWS_AS(cholesky_lower(singular, 0.0, 0), FactorizationFailed);
  const MatrixXd l = cholesky_lower(singular);
  CHECK(l.diagonal().minCoeff() > 0.0);
}

TEST_CASE("schur_complement examples") {
  SpdMatrix m(matrix2(4.0, 2.0, 2.0, 5.0));
  const SpdMatrix s = schur_complement(m, 1);
  CHECK(s.dim() == 1);
  CHECK(s.entries()(0, 0) == doctest::Approx(4.0));

  MatrixXd block = MatrixXd::Zero(4, 4);
  block.topLeftCorner(2, 2) = matrix2(2.0, 1.0, 1.0, 2.0);
  block.bottomRightCorner(2, 2) = matrix2(3.0, 0.5, 0.5, 1.0);
  const SpdMatrix s2 = schur_complement(SpdMatrix(block), 2);
  CHECK((s2.entries() - block.bottomRightCorner(2, 2)).norm() <= 1e-12);

  const SpdMatrix s3 = schur_complement(SpdMatrix::identity(4), 2);
  CHECK((s3.entries() - MatrixXd::Identity(2, 2)).norm() <= 1e-14);
}

TEST_CASE("schur_complement equals brute-force conditional covariance") {
  auto rng = make_rng(1234);
  for (int trial = 0; trial < 20; ++trial) {
    const SpdMatrix m = random_spd(&rng, 4);
    const int k = 1 + static_cast<int>(trial % 3);
    const SpdMatrix s = schur_complement(m, k);
    // conditional covariance via the inverse-block identity:
    // A/A_11 = ((A^{-1})_{22})^{-1}
    const MatrixXd inv = m.entries().inverse();
    const MatrixXd ref =
        inv.bottomRightCorner(4 - k, 4 - k).inverse();
    CHECK((s.entries() - ref).norm() <= 1e-7 * (1.0 + ref.norm()));
  }
}

TEST_CASE("polar_unitary examples") {
  CHECK((polar_unitary(matrix2(2.0, 0.0, 0.0, 3.0)) -
         MatrixXd::Identity(2, 2))
            .norm() <= 1e-12);
  const MatrixXd rot = matrix2(0.0, -1.0, 1.0, 0.0);
  CHECK((polar_unitary(rot) - rot).norm() <= 1e-12);
  const MatrixXd flip = polar_unitary(matrix2(2.0, 0.0, 0.0, -3.0));
  CHECK(flip(0, 0) == doctest::Approx(1.0));
  CHECK(flip(1, 1) == doctest::Approx(-1.0));
  CHECK(std::abs(flip(0, 1)) <= 1e-12);

  PolarOptions strict;
  strict.strict = true;
  CHECK_THROWS_AS(polar_unitary(matrix2(1.0, 0.0, 0.0, 0.0), strict),
                  RankDeficient);
  // non-strict maps the null direction to +1
  const MatrixXd patched = polar_unitary(matrix2(1.0, 0.0, 0.0, 0.0));
  CHECK((patched - MatrixXd::Identity(2, 2)).norm() <= 1e-12);
}

TEST_CASE("pseudo_inverse examples") {
  SpdMatrix d(matrix2(2.0, 0.0, 0.0, 0.0));
  const MatrixXd p = pseudo_inverse(d).entries();
  CHECK(p(0, 0) == doctest::Approx(0.5));
  CHECK(p(1, 1) == doctest::Approx(0.0));

  CHECK((pseudo_inverse(SpdMatrix::identity(3)).entries() -
         MatrixXd::Identity(3, 3))
            .norm() <= 1e-12);

  VectorXd v(2);
  v << 2.0, 0.0;  // ||v|| = 2, eigenvalue 4
  const MatrixXd vv = v * v.transpose();
  const MatrixXd pv = pseudo_inverse(SpdMatrix(vv)).entries();
  CHECK((pv - vv / 16.0).norm() <= 1e-12);
}

TEST_CASE("psdlin invariants on random spd matrices") {
  auto rng = make_rng(99);
  std::uniform_int_distribution<int> dims(2, 16);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index d = dims(rng);
    const SpdMatrix m = random_spd(&rng, d);
    const double scale = m.entries().norm();

    const MatrixXd s = sqrtm(m).entries();
    CHECK((s * s - m.entries()).norm() <= 1e-8 * (1.0 + scale));

    const MatrixXd is = inv_sqrtm(m).entries();
    CHECK((is * m.entries() * is - MatrixXd::Identity(d, d)).norm() <=
          1e-8 * (1.0 + scale));

    const MatrixXd l = cholesky_lower(m);
    CHECK((l * l.transpose() - m.entries()).norm() <= 1e-8 * (1.0 + scale));

    // polar of an SPD matrix is the identity; orthogonal inputs are fixed
    CHECK((polar_unitary(m.entries()) - MatrixXd::Identity(d, d)).norm() <=
          1e-8);
    const MatrixXd q = sot::testing::random_orthogonal(&rng, d);
    CHECK((polar_unitary(q) - q).norm() <= 1e-10);

    const MatrixXd pinv = pseudo_inverse(m).entries();
    CHECK((m.entries() * pinv * m.entries() - m.entries()).norm() <=
          1e-8 * (1.0 + scale));
  }
}

TEST_CASE("eigen factorization invariants") {
  auto rng = make_rng(7);
  const SpdMatrix m = random_spd(&rng, 6);
  const EigenFactorization f = m.factorize();
  for (Eigen::Index i = 1; i < f.eigenvalues.size(); ++i) {
    CHECK(f.eigenvalues(i - 1) >= f.eigenvalues(i));
  }
  CHECK((f.reconstruct() - m.entries()).norm() <=
        1e-10 * (1.0 + m.entries().norm()));
  CHECK((f.eigenvectors.transpose() * f.eigenvectors -
         MatrixXd::Identity(6, 6))
            .norm() <= 1e-10);
}
