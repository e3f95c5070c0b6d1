#include <doctest.h>

#include <cmath>
#include <random>

#include "mvcca/cca.hpp"
#include "mvcca/ensemble.hpp"
#include "mvcca/errors.hpp"
#include "mvcca/sampling.hpp"
#include "oracles.hpp"

using namespace mvcca;

namespace {

/// Population canonical correlations of views (i, j) from the covariance
/// blocks Σ = A Aᵀ + I, computed without the library's whitening path.
std::vector<double> oracle_spectrum(const MixingEnsemble& e, std::size_t i, std::size_t j) {
  const MatrixXd& ai = e.mixing[i];
  const MatrixXd& aj = e.mixing[j];
  return oracle::canonical_correlations(ai * ai.transpose() + MatrixXd::Identity(ai.rows(), ai.rows()),
                                        ai * aj.transpose(),
                                        aj * aj.transpose() + MatrixXd::Identity(aj.rows(), aj.rows()));
}

}  // namespace

TEST_CASE("uniform t=0.8 gives gains sqrt(0.8) and sigma 2") {
  const auto spectra = TargetSpectra::uniform({0.8, 0.8, 0.8}, 5);
  const auto g = solve_per_view_gains(spectra);
  for (const auto& gi : g)
    for (Index k = 0; k < gi.size(); ++k) CHECK(gi(k) == doctest::Approx(0.894427191).epsilon(1e-9));
  const auto e = build_mixing(g, spectra.view_dims, {1, streams::kEnsemble});
  for (const auto& s : e.singular_values)
    for (Index k = 0; k < s.size(); ++k) CHECK(std::abs(s(k) - 2.0) < 1e-12);
}

TEST_CASE("symmetric targets: pairwise gain products recover t") {
  TargetSpectra s;
  s.r = 3;
  s.t = {std::vector<double>{0.9, 0.6, 0.3}, std::vector<double>{0.9, 0.6, 0.3}, std::vector<double>{0.9, 0.6, 0.3}};
  s.view_dims = {4, 4, 4};
  const auto g = solve_per_view_gains(s);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j)
      for (Index k = 0; k < 3; ++k)
        CHECK(g[i](k) * g[j](k) == doctest::Approx(s.t[pair_slot(i, j)][static_cast<std::size_t>(k)]).epsilon(1e-14));
}

TEST_CASE("boundary spectrum with a unit gain is infeasible") {
  TargetSpectra s;
  s.r = 1;
  s.t = {std::vector<double>{0.9}, std::vector<double>{0.9}, std::vector<double>{0.81}};
  s.view_dims = {2, 2, 2};
  try {
    solve_per_view_gains(s);
    FAIL("expected an infeasible spectrum");
  } catch (const InfeasibleSpectrumError& e) {
    CHECK(e.view() == 0);
    CHECK(e.mode() == 0);
  }
}

TEST_CASE("target validation") {
  auto s = TargetSpectra::uniform({0.8, 0.5}, 3);
  s.t[1] = {0.5, 0.8};
  CHECK_THROWS_AS(s.validate(), ParameterError);
  CHECK_THROWS_AS(TargetSpectra::uniform({1.0}, 3), ParameterError);
  CHECK_THROWS_AS(TargetSpectra::uniform({0.0}, 3), ParameterError);
  CHECK_THROWS_AS(TargetSpectra::uniform({0.8, 0.5}, 1), DimensionError);
  const auto g = solve_per_view_gains(TargetSpectra::uniform({0.8, 0.5}, 3));
  CHECK_THROWS_AS(build_mixing(g, {3, 1, 3}, {}), DimensionError);
}

TEST_CASE("all t=0.8, d=5, r=5: population spectrum is exactly 0.8") {
  const auto spectra = TargetSpectra::uniform(std::vector<double>(5, 0.8), 5);
  const auto e = build_mixing(solve_per_view_gains(spectra), spectra.view_dims, {3, streams::kEnsemble});
  const auto p = population_normalized_crosscov(e, 0, 1);
  for (Index k = 0; k < 5; ++k) CHECK(std::abs(p.svd.singular_values(k) - 0.8) < 1e-10);
  CHECK(p.rank == 5);
}

TEST_CASE("random feasible spectra match an independent canonical-correlation oracle") {
  std::mt19937_64 eng(42);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int trial = 0; trial < 25; ++trial) {
    const Index r = 1 + trial % 4;
    ViewGains g;
    for (auto& gi : g) {
      std::vector<double> v(static_cast<std::size_t>(r));
      for (auto& x : v) x = u(eng);
      std::sort(v.begin(), v.end(), std::greater<>());
      gi = Eigen::Map<VectorXd>(v.data(), r);
    }
    TargetSpectra s;
    s.r = r;
    s.view_dims = {r + 1, r + 2, r};
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i + 1; j < 3; ++j)
        for (Index k = 0; k < r; ++k) s.t[pair_slot(i, j)].push_back(g[i](k) * g[j](k));
    const auto solved = solve_per_view_gains(s);
    for (std::size_t i = 0; i < 3; ++i) CHECK((solved[i] - g[i]).cwiseAbs().maxCoeff() < 1e-12);
    const auto e = build_mixing(solved, s.view_dims, {static_cast<std::uint64_t>(trial), streams::kEnsemble});
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i + 1; j < 3; ++j) {
        const auto want = oracle_spectrum(e, i, j);
        const auto got = population_normalized_crosscov(e, i, j);
        for (Index k = 0; k < r; ++k) {
          CHECK(std::abs(got.svd.singular_values(k) - s.t[pair_slot(i, j)][static_cast<std::size_t>(k)]) < 1e-10);
          CHECK(std::abs(got.svd.singular_values(k) - want[static_cast<std::size_t>(k)]) < 1e-8);
        }
        CHECK(got.rank == r);
      }
  }
}

TEST_CASE("vanishing gains give a valid, nearly uncorrelated ensemble") {
  ViewGains g{VectorXd::Constant(1, 1e-8), VectorXd::Constant(1, 1e-8), VectorXd::Constant(1, 1e-8)};
  const auto e = build_mixing(g, {2, 2, 2}, {});
  CHECK(std::abs(e.singular_values[0](0) - 1e-8) < 1e-20);
  const auto p = population_normalized_crosscov(e, 0, 2);
  CHECK(p.svd.singular_values(0) < 1e-15);
}

TEST_CASE("zero mixing: R is zero with rank 0") {
  const auto e = MixingEnsemble::from_mixings({MatrixXd::Zero(3, 2), MatrixXd::Zero(2, 2), MatrixXd::Zero(4, 2)});
  const auto p = population_normalized_crosscov(e, 0, 1);
  CHECK(p.r.isZero(0.0));
  CHECK(p.rank == 0);
}

TEST_CASE("mixings are Haar-orthogonal factorizations") {
  const auto spectra = TargetSpectra::uniform({0.9, 0.7}, 4);
  const auto e = build_mixing(solve_per_view_gains(spectra), spectra.view_dims, {5, streams::kEnsemble});
  CHECK((e.shared_right.transpose() * e.shared_right - MatrixXd::Identity(2, 2)).norm() < 1e-12);
  for (std::size_t i = 0; i < 3; ++i) {
    const MatrixXd& u = e.rotations[i];
    CHECK((u.transpose() * u - MatrixXd::Identity(4, 4)).norm() < 1e-12);
    const MatrixXd rebuilt = u.leftCols(2) * e.singular_values[i].asDiagonal() * e.shared_right.transpose();
    CHECK((rebuilt - e.mixing[i]).norm() < 1e-12);
  }
  // Same stream, same ensemble.
  const auto again = build_mixing(solve_per_view_gains(spectra), spectra.view_dims, {5, streams::kEnsemble});
  CHECK(again.mixing[2] == e.mixing[2]);
}

TEST_CASE("sampling: A = 2I gives covariance close to 5I") {
  const auto e = MixingEnsemble::from_mixings({2.0 * MatrixXd::Identity(2, 2), 2.0 * MatrixXd::Identity(2, 2)});
  const auto data = sample_sources(e, PriorSpec::gaussian(), 100'000, {17, 1});
  for (const auto& v : data) {
    const auto m = cca::empirical_moments(v);
    CHECK(linalg::spectral_norm(m.cov_ii - 5.0 * MatrixXd::Identity(2, 2)) < 0.05);
  }
}

TEST_CASE("sampling: zero mixing gives independent views") {
  const auto e = MixingEnsemble::from_mixings({MatrixXd::Zero(3, 2), MatrixXd::Zero(3, 2)});
  const auto data = sample_sources(e, PriorSpec::gaussian(), 20'000, {2, 1});
  const auto m = cca::empirical_moments(data[0], data[1]);
  CHECK(linalg::spectral_norm(*m.cov_ij) < 4.0 * std::sqrt(3.0 / 20'000.0));
}

TEST_CASE("sampling: all t=0.8 ensemble reproduces 0.8 empirically") {
  const auto spectra = TargetSpectra::uniform({0.8, 0.8, 0.8}, 5);
  const auto e = build_mixing(solve_per_view_gains(spectra), spectra.view_dims, {4, streams::kEnsemble});
  const auto data = sample_sources(e, PriorSpec::gaussian(), 100'000, {4, 2});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) {
      const auto r = cca::empirical_normalized_crosscov(data[i], data[j]);
      for (Index k = 0; k < 3; ++k) CHECK(std::abs(r.singular_values()(k) - 0.8) < 0.02);
    }
}

TEST_CASE("sampling is deterministic and view-indexed") {
  const auto spectra = TargetSpectra::uniform({0.7}, 2);
  const auto e = build_mixing(solve_per_view_gains(spectra), spectra.view_dims, {});
  const auto a = sample_sources(e, PriorSpec::gamma(2.0), 500, {8, 3});
  const auto b = sample_sources(e, PriorSpec::gamma(2.0), 500, {8, 3});
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a[i].z == b[i].z);
    CHECK(a[i].view_index == i);
  }
}

TEST_CASE("spectra JSON round trip") {
  const auto s = TargetSpectra::uniform({0.9, 0.4}, 6);
  const auto t = spectra_from_json(to_json(s));
  CHECK(t.r == 2);
  CHECK(t.t == s.t);
  CHECK(t.view_dims == s.view_dims);
}
