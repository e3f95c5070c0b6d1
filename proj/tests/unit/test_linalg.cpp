#include <doctest.h>

#include <cmath>
#include <random>

#include "mvcca/errors.hpp"
#include "mvcca/linalg.hpp"
#include "oracles.hpp"

using namespace mvcca;
using namespace mvcca::linalg;

namespace {

MatrixXd random_matrix(Index r, Index c, unsigned seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> g;
  MatrixXd m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = g(eng);
  return m;
}

MatrixXd e(Index d, Index k) { return MatrixXd::Identity(d, d).col(k); }

}  // namespace

TEST_CASE("sym_inv_sqrt examples") {
  CHECK(sym_inv_sqrt(MatrixXd::Identity(4, 4), 1e-10).isApprox(MatrixXd::Identity(4, 4), 1e-14));
  const MatrixXd w = sym_inv_sqrt(5.0 * MatrixXd::Identity(2, 2), 1e-10);
  CHECK(std::abs(w(0, 0) - 0.4472135955) < 1e-10);
  CHECK(std::abs(w(1, 1) - 0.4472135955) < 1e-10);
  CHECK(std::abs(w(0, 1)) < 1e-15);
}

TEST_CASE("sym_inv_sqrt whitens a random SPD matrix") {
  const MatrixXd a = random_matrix(6, 6, 1);
  const MatrixXd m = a * a.transpose() + 0.5 * MatrixXd::Identity(6, 6);
  const MatrixXd w = sym_inv_sqrt(m, 1e-10);
  CHECK((w - w.transpose()).norm() < 1e-12);
  CHECK((w * m * w - MatrixXd::Identity(6, 6)).norm() < 1e-10);
  CHECK((w * w * m - MatrixXd::Identity(6, 6)).norm() < 1e-10);
}

TEST_CASE("sym_inv_sqrt rejects near-singular and asymmetric input") {
  MatrixXd m = MatrixXd::Identity(3, 3);
  m(2, 2) = 1e-12;
  CHECK_THROWS_AS(sym_inv_sqrt(m, 1e-10), NearSingularError);
  CHECK_THROWS_AS(sym_inv_sqrt(MatrixXd::Zero(2, 2), 1e-10), NearSingularError);
  MatrixXd asym = MatrixXd::Identity(2, 2);
  asym(0, 1) = 0.3;
  CHECK_THROWS_AS(sym_inv_sqrt(asym, 1e-10), Error);
}

TEST_CASE("svd_ordered examples and properties") {
  MatrixXd d = MatrixXd::Zero(2, 2);
  d(0, 0) = 0.5;
  d(1, 1) = 0.9;
  const auto s = svd_ordered(d);
  CHECK(s.singular_values(0) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(s.singular_values(1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(std::abs(s.u(1, 0)) - 1.0) < 1e-15);
  CHECK(std::abs(std::abs(s.v(1, 0)) - 1.0) < 1e-15);

  const auto z = svd_ordered(MatrixXd::Zero(3, 2));
  CHECK(z.singular_values.isZero(0.0));

  const MatrixXd m = random_matrix(5, 3, 2);
  const auto r = svd_ordered(m);
  for (Index k = 1; k < r.singular_values.size(); ++k) CHECK(r.singular_values(k) <= r.singular_values(k - 1));
  const Index k = r.singular_values.size();
  CHECK((r.u.leftCols(k) * r.singular_values.asDiagonal() * r.v.leftCols(k).transpose() - m).norm() < 1e-12);
  // Deterministic signs: largest-magnitude entry of every left vector is positive.
  for (Index c = 0; c < k; ++c) {
    Index arg;
    r.u.col(c).cwiseAbs().maxCoeff(&arg);
    CHECK(r.u(arg, c) > 0.0);
  }
  MatrixXd bad = m;
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(svd_ordered(bad), NumericError);
}

TEST_CASE("principal angles examples") {
  const SubspaceBasis b1(e(2, 0)), b2(e(2, 1));
  CHECK(principal_angles(b1, b1).max_degrees == doctest::Approx(0.0));
  CHECK(principal_angles(b1, b2).degrees.at(0) == doctest::Approx(90.0));
  MatrixXd diag(2, 1);
  diag << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK(principal_angles(b1, SubspaceBasis(diag)).degrees.at(0) == doctest::Approx(45.0).epsilon(1e-12));
  CHECK_THROWS_AS(principal_angles(b1, SubspaceBasis(e(3, 0))), DimensionError);
}

TEST_CASE("sin_theta_norm examples and oracle") {
  const SubspaceBasis b1(e(2, 0)), b2(e(2, 1));
  CHECK(sin_theta_norm(b1, b1) == doctest::Approx(0.0));
  CHECK(sin_theta_norm(b1, b2) == doctest::Approx(1.0));
  MatrixXd diag(2, 1);
  diag << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK(sin_theta_norm(b1, SubspaceBasis(diag)) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(sin_theta_norm(b1, SubspaceBasis(MatrixXd::Identity(2, 2))), DimensionError);

  for (unsigned seed = 0; seed < 20; ++seed) {
    const MatrixXd a = random_matrix(7, 3, 100 + seed), b = random_matrix(7, 3, 200 + seed);
    const auto sa = SubspaceBasis::span_of(a), sb = SubspaceBasis::span_of(b);
    const double s = sin_theta_norm(sa, sb);
    CHECK(s == doctest::Approx(oracle::sin_theta(a, b)).epsilon(1e-9));
    CHECK(std::sin(principal_angles(sa, sb).max_degrees * M_PI / 180.0) == doctest::Approx(s).epsilon(1e-9));
  }
}

TEST_CASE("projector examples") {
  CHECK(projector(SubspaceBasis(MatrixXd::Zero(3, 0))).isZero(0.0));
  const MatrixXd p = projector(SubspaceBasis(e(2, 0)));
  CHECK(p(0, 0) == 1.0);
  CHECK(p(0, 1) == 0.0);
  CHECK(p(1, 1) == 0.0);
  const MatrixXd q = projector(SubspaceBasis::span_of(random_matrix(6, 2, 9)));
  CHECK((q * q - q).norm() < 1e-12);
  CHECK((q - q.transpose()).norm() < 1e-14);
  CHECK(q.trace() == doctest::Approx(2.0));
}

TEST_CASE("SubspaceBasis rejects non-orthonormal input") {
  CHECK_THROWS_AS(SubspaceBasis(2.0 * e(3, 0)), DimensionError);
}
