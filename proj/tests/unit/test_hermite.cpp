#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mvcca/errors.hpp"
#include "mvcca/hermite.hpp"
#include "oracles.hpp"

using namespace mvcca;
using namespace mvcca::hermite;

namespace {

/// E[ψ_n(u) ψ_m(v)] for a standard bivariate normal with correlation t, by
/// trapezoid integration against the closed-form density on a fine grid.
double grid_cross_moment(int n, int m, double t) {
  const double h = 0.02, lim = 12.0;
  const int k = static_cast<int>(2 * lim / h);
  std::vector<double> x(k + 1), pn(k + 1), pm(k + 1);
  for (int i = 0; i <= k; ++i) {
    x[i] = -lim + i * h;
    pn[i] = oracle::psi(n, x[i]);
    pm[i] = oracle::psi(m, x[i]);
  }
  double sum = 0.0;
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j <= k; ++j) sum += pn[i] * pm[j] * bivariate_normal_density(x[i], x[j], t);
  return sum * h * h;
}

}  // namespace

TEST_CASE("psi examples") {
  CHECK(psi(1, 1.3) == doctest::Approx(1.3).epsilon(1e-15));
  CHECK(std::abs(psi(2, 1.0)) < 1e-15);
  for (double x : {-3.0, 0.0, 0.7, 10.0}) CHECK(psi(0, x) == 1.0);
  CHECK(psi(2, 2.0) == doctest::Approx(3.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(psi(-1, 0.0), ParameterError);
}

TEST_CASE("psi matches the explicit Hermite sum") {
  for (int n = 0; n <= 12; ++n)
    for (double x : {-4.0, -1.1, 0.0, 0.3, 2.5, 5.0}) {
      CAPTURE(n);
      CAPTURE(x);
      CHECK(psi(n, x) == doctest::Approx(oracle::psi(n, x)).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("psi stays finite at high degree") {
  for (int n : {150, 200, 400}) CHECK(std::isfinite(psi(n, 3.0)));
  std::vector<double> all(201);
  psi_all(200, 1.7, all);
  CHECK(all[200] == psi(200, 1.7));
}

TEST_CASE("standard normal rule integrates monomials exactly") {
  const auto rule = standard_normal_rule(20);
  double wsum = 0.0;
  for (double w : rule.weights) wsum += w;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
  for (int k = 0; k <= 39; ++k) {
    // Odd moments cancel between terms of size Σ w|x|^k, so compare on that scale.
    double s = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      s += rule.weights[i] * std::pow(rule.nodes[i], k);
      scale += rule.weights[i] * std::pow(std::abs(rule.nodes[i]), k);
    }
    CAPTURE(k);
    CHECK(std::abs(s - oracle::normal_moment(k)) <= 1e-12 * scale);
  }
}

TEST_CASE("orthonormality examples") {
  const auto rule = standard_normal_rule(kDefaultNodes);
  double i00 = 0.0, i02 = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    i00 += rule.weights[i] * psi(0, rule.nodes[i]) * psi(0, rule.nodes[i]);
    i02 += rule.weights[i] * psi(0, rule.nodes[i]) * psi(2, rule.nodes[i]);
  }
  CHECK(i00 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(i02) < 1e-12);
  CHECK(orthonormality_check(6, 40) < 1e-10);
  CHECK(orthonormality_check(6, 64) < 1e-10);
  CHECK_THROWS_AS(orthonormality_check(6, 6), QuadratureError);
}

TEST_CASE("cross moment examples") {
  CHECK(mehler_cross_moment(1, 1, 0.5).value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mehler_cross_moment(2, 2, 0.5).value == doctest::Approx(0.25).epsilon(1e-12));
  for (double t : {0.1, 0.5, 0.9}) CHECK(std::abs(mehler_cross_moment(1, 2, t).value) < 1e-8);
}

TEST_CASE("cross moments agree with direct grid integration") {
  for (auto [n, m, t] : {std::tuple{2, 2, 0.3}, std::tuple{3, 3, 0.7}, std::tuple{1, 3, 0.6}, std::tuple{4, 2, 0.8},
                         std::tuple{5, 5, 0.9}}) {
    CAPTURE(n);
    CAPTURE(m);
    CHECK(std::abs(mehler_cross_moment(n, m, t).value - grid_cross_moment(n, m, t)) < 1e-8);
  }
}

TEST_CASE("diagonality sweep up to degree 6") {
  for (int k = 1; k <= 9; ++k) {
    const double t = 0.1 * k;
    for (int n = 0; n <= 6; ++n)
      for (int m = 0; m <= 6; ++m) {
        const auto c = mehler_cross_moment(n, m, t);
        CHECK_FALSE(c.precision_warning);
        CHECK(std::abs(c.value - (n == m ? std::pow(t, n) : 0.0)) < 1e-8);
      }
  }
}

TEST_CASE("precision warning near t = 1") {
  CHECK(mehler_cross_moment(2, 2, 0.999).precision_warning);
  CHECK(mehler_cross_moment(2, 2, 0.9999).precision_warning);
  CHECK_FALSE(mehler_cross_moment(2, 2, 0.99).precision_warning);
}

TEST_CASE("mode spectrum examples") {
  const std::vector<double> t{0.9, 0.6};
  const auto s = mode_spectrum(t, 3);
  bool found = false;
  for (const auto& mode : s.modes)
    if (mode.index == HermiteIndex{2, 1}) {
      found = true;
      CHECK(mode.weight == doctest::Approx(0.486).epsilon(1e-14));
      CHECK(mode.degree == 3);
    }
  CHECK(found);

  const std::vector<double> one{0.7};
  const auto g = mode_spectrum(one, 3);
  REQUIRE(g.modes.size() == 3);
  CHECK(g.modes[0].weight == doctest::Approx(0.7));
  CHECK(g.modes[1].weight == doctest::Approx(0.49));
  CHECK(g.modes[2].weight == doctest::Approx(0.343));

  const std::vector<double> two{0.9, 0.85};
  const auto top = mode_spectrum(two, 2);
  CHECK(top.modes[0].weight == doctest::Approx(0.9));
  CHECK(top.modes[1].weight == doctest::Approx(0.85));
  CHECK(top.modes[2].weight == doctest::Approx(0.81));
}

TEST_CASE("mode spectrum is a full, sorted enumeration with the higher-order ceiling") {
  const std::vector<double> t{0.8, 0.7, 0.3};
  const auto s = mode_spectrum(t, 5);
  CHECK(s.modes.size() == 55);  // C(8,3) − 1
  for (std::size_t k = 1; k < s.modes.size(); ++k) CHECK(s.modes[k].weight <= s.modes[k - 1].weight);
  for (const auto& mode : s.modes)
    if (mode.degree >= 2) CHECK(mode.weight <= t[0] * t[0] + 1e-15);
}

TEST_CASE("ties break by descending lexicographic index") {
  const std::vector<double> t{0.9, 0.81};
  const auto s = mode_spectrum(t, 2);
  CHECK(s.modes[1].index == HermiteIndex{2, 0});
  CHECK(s.modes[2].index == HermiteIndex{0, 1});
  CHECK_FALSE(leading_modes_are_linear(t, 2));
  CHECK_FALSE(dominance_check(t).holds);
}

TEST_CASE("mode cap raises a size error") {
  const std::vector<double> t(12, 0.5);
  CHECK_THROWS_AS(mode_spectrum(t, 20), SizeError);
}

TEST_CASE("mode spectrum CSV") {
  const std::vector<double> t{0.5};
  std::ostringstream out;
  write_mode_spectrum_csv(mode_spectrum(t, 2), out);
  CHECK(out.str() == "index,degree,t_n\n1,1,0.5\n2,2,0.25\n");
}

TEST_CASE("dominance examples") {
  const std::vector<double> a{0.9, 0.85}, b{0.9, 0.5}, c{0.7};
  CHECK(dominance_check(a).gap == doctest::Approx(0.04));
  CHECK(dominance_check(a).holds);
  CHECK(dominance_check(b).gap == doctest::Approx(-0.31));
  CHECK_FALSE(dominance_check(b).holds);
  CHECK(dominance_check(c).holds);
}

TEST_CASE("leading-mode examples") {
  const std::vector<double> a{0.9, 0.85}, b{0.9, 0.5}, c{0.3, 0.2};
  CHECK(leading_modes_are_linear(a, 4));
  CHECK_FALSE(leading_modes_are_linear(b, 2));
  CHECK(leading_modes_are_linear(c, 6));
  CHECK_THROWS_AS(leading_modes_are_linear(a, 1), ParameterError);
}

TEST_CASE("leading modes, dominance and brute-force enumeration agree") {
  std::mt19937_64 eng(2024);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> t(static_cast<std::size_t>(1 + trial % 4));
    for (auto& v : t) v = u(eng);
    std::sort(t.begin(), t.end(), std::greater<>());
    for (int d : {2, 3, 4}) {
      const bool lead = leading_modes_are_linear(t, d);
      CHECK(lead == dominance_check(t).holds);
      CHECK(lead == oracle::linear_modes_lead(t, d));
    }
  }
}

TEST_CASE("Mehler partial sums converge to the bivariate density") {
  double prev = 1e300;
  for (int d : {2, 4, 8, 16}) {
    double worst = 0.0;
    for (double x = -2.0; x <= 2.0; x += 0.25)
      for (double y = -2.0; y <= 2.0; y += 0.25)
        worst = std::max(worst, std::abs(mehler_density_partial_sum(x, y, 0.5, d) - bivariate_normal_density(x, y, 0.5)));
    CAPTURE(d);
    CHECK(worst < prev);
    prev = worst;
  }
  CHECK(prev < 1e-3);
}
