#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "membrane/geometry.hpp"
#include "membrane/rng.hpp"

using namespace membrane;

namespace {

ModelParams make(int d, Eigen::MatrixXd B, Eigen::VectorXd nu,
                 Eigen::VectorXd alpha, double q = 0.0) {
  ModelParams p;
  p.d = d;
  p.B = std::move(B);
  p.nu = std::move(nu);
  p.alpha = std::move(alpha);
  p.q = q;
  return p;
}

Eigen::MatrixXd random_spd(int d, Rng& rng) {
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
  return a * a.transpose() + 0.3 * Eigen::MatrixXd::Identity(d, d);
}

Eigen::VectorXd random_unit(int d, Rng& rng) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.normal();
  return v / v.norm();
}

}  // namespace

TEST_CASE("identity operator in the plane") {
  const auto p = make(2, Eigen::Matrix2d::Identity(), Eigen::Vector2d(0, 1),
                      Eigen::Vector2d(0, 0));
  const auto dec = build_decomposition(p);
  CHECK(dec.sigma2 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(dec.b.norm() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(dec.B_S(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK((dec.N - Eigen::Vector2d(0, 1)).norm() < 1e-15);
}

TEST_CASE("coupled operator: Schur complement by hand") {
  Eigen::Matrix2d B;
  B << 2, 1, 1, 2;
  const auto dec = build_decomposition(
      make(2, B, Eigen::Vector2d(0, 1), Eigen::Vector2d(0, 0)));
  CHECK(dec.sigma2 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(dec.b[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(dec.b[1] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(dec.B_S(0, 0) == doctest::Approx(1.5).epsilon(1e-14));  // 2 - 1/2
}

TEST_CASE("diagonal operator with nu an eigenvector decouples") {
  const auto dec = build_decomposition(
      make(3, Eigen::Vector3d(4, 9, 1).asDiagonal(), Eigen::Vector3d(0, 0, 1),
           Eigen::Vector3d(0, 0, 0)));
  CHECK(dec.sigma2 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(dec.b.norm() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(dec.B_S(0, 0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(dec.B_S(1, 1) == doctest::Approx(9.0).epsilon(1e-14));
  CHECK(std::abs(dec.B_S(0, 1)) < 1e-14);
}

TEST_CASE("projection and nu-component") {
  const auto dec = build_decomposition(make(2, Eigen::Matrix2d::Identity(),
                                            Eigen::Vector2d(0, 1),
                                            Eigen::Vector2d(0, 0)));
  CHECK(project_to_S(dec.nu, dec).norm() < 1e-15);
  const Eigen::Vector2d x(3, 5);
  CHECK((project_to_S(x, dec) - Eigen::Vector2d(3, 0)).norm() < 1e-15);
  CHECK(nu_component(x, dec) == doctest::Approx(5.0));
  CHECK(nu_component(2.0 * dec.nu, dec) == doctest::Approx(2.0));
  const Eigen::Vector2d in_s(7, 0);
  CHECK((project_to_S(in_s, dec) - in_s).norm() < 1e-15);  // idempotence
  CHECK(nu_component(in_s, dec) == doctest::Approx(0.0));
}

TEST_CASE("reconstruction, basis orthonormality and the Schur identity") {
  Rng rng(11, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 2 + rep % 3;
    const auto nu = random_unit(d, rng);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(d);
    const auto params = make(d, random_spd(d, rng), nu, alpha);
    const auto dec = build_decomposition(params);

    CHECK((dec.basis.transpose() * dec.basis -
           Eigen::MatrixXd::Identity(d - 1, d - 1))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    CHECK((dec.basis.transpose() * nu).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x[i] = rng.normal();
    CHECK((project_to_S(x, dec) + nu_component(x, dec) * nu - x).norm() <
          1e-12);

    // Lateral operator equals the inverse of the projected inverse, the
    // standard block-inverse identity for the Schur complement.
    const Eigen::MatrixXd route2 =
        (dec.basis.transpose() * params.B.inverse() * dec.basis).inverse();
    CHECK((dec.B_S - route2).cwiseAbs().maxCoeff() < 1e-10);

    // And equals the explicit Schur form in ambient coordinates.
    const Eigen::MatrixXd schur =
        dec.basis.transpose() *
        (params.B - dec.N * dec.N.transpose() / dec.sigma2) * dec.basis;
    CHECK((dec.B_S - schur).cwiseAbs().maxCoeff() < 1e-10);

    // Cholesky caches are consistent.
    CHECK((dec.chol_B_S * dec.chol_B_S.transpose() - dec.B_S)
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    CHECK(dec.log_det_B ==
          doctest::Approx(std::log(params.B.determinant())).epsilon(1e-10));
  }
}

TEST_CASE("rotation equivariance of sigma2") {
  Rng rng(12, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const int d = 3;
    const auto params = make(d, random_spd(d, rng), random_unit(d, rng),
                             Eigen::VectorXd::Zero(d));
    const auto dec = build_decomposition(params);

    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = rng.normal();
    const Eigen::MatrixXd rot = Eigen::HouseholderQR<Eigen::MatrixXd>(m)
                                    .householderQ();
    const auto rotated = make(d, rot * params.B * rot.transpose(),
                              rot * params.nu, Eigen::VectorXd::Zero(d));
    const auto dec2 = build_decomposition(rotated);
    CHECK(dec2.sigma2 == doctest::Approx(dec.sigma2).epsilon(1e-10));
    CHECK(dec2.log_det_B_S ==
          doctest::Approx(dec.log_det_B_S).epsilon(1e-9));
  }
}

TEST_CASE("determinism of the basis construction") {
  Rng rng(13, 0);
  const auto params =
      make(3, random_spd(3, rng), random_unit(3, rng), Eigen::VectorXd::Zero(3));
  const auto a = build_decomposition(params);
  const auto b = build_decomposition(params);
  CHECK(a.basis == b.basis);
  CHECK(a.chol_B_S == b.chol_B_S);
}

TEST_CASE("invalid parameters are rejected with a diagnostic") {
  Eigen::Matrix2d asym;
  asym << 1, 0.5, 0.4, 1;
  CHECK_THROWS_WITH_AS(
      build_decomposition(make(2, asym, Eigen::Vector2d(0, 1),
                               Eigen::Vector2d(0, 0))),
      doctest::Contains("symmetric"), std::invalid_argument);

  Eigen::Matrix2d indef;
  indef << 1, 2, 2, 1;
  CHECK_THROWS_WITH_AS(
      build_decomposition(make(2, indef, Eigen::Vector2d(0, 1),
                               Eigen::Vector2d(0, 0))),
      doctest::Contains("positive definite"), std::invalid_argument);

  CHECK_THROWS_WITH_AS(
      build_decomposition(make(2, Eigen::Matrix2d::Identity(),
                               Eigen::Vector2d(0, 2), Eigen::Vector2d(0, 0))),
      doctest::Contains("unit"), std::invalid_argument);

  CHECK_THROWS_WITH_AS(
      build_decomposition(make(2, Eigen::Matrix2d::Identity(),
                               Eigen::Vector2d(0, 1), Eigen::Vector2d(0, 0.1))),
      doctest::Contains("orthogonal"), std::invalid_argument);

  CHECK_THROWS_WITH_AS(
      build_decomposition(make(2, Eigen::Matrix2d::Identity(),
                               Eigen::Vector2d(0, 1), Eigen::Vector2d(0, 0),
                               1.5)),
      doctest::Contains("|q|"), std::invalid_argument);
}
