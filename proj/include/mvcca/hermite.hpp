#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace mvcca::hermite {

/// ψ_n(x) = H_n(x/√2)/√(2ⁿ n!), orthonormal under the standard normal density.
/// Evaluated by the normalized three-term recurrence.
double psi(int n, double x);

/// ψ_0(x) … ψ_max(x) into `out` (size max + 1).
void psi_all(int max_degree, double x, std::span<double> out);

/// Quadrature rule: Σ_k w_k f(x_k) approximates ∫ f(x) w(x) dx for its weight.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss–Hermite rule for the physicists' weight e^{-z²} (Golub–Welsch nodes,
/// Newton-polished, Christoffel weights).
QuadratureRule gauss_hermite(int nodes);

/// Same rule moved to the standard normal density via x = √2 z, w/√π.
QuadratureRule standard_normal_rule(int nodes);

inline constexpr int kDefaultNodes = 64;

/// max over n, m <= max_degree of |E[ψ_n ψ_m] − δ_nm| under Q-node quadrature.
/// Throws QuadratureError when nodes < max_degree + 1.
double orthonormality_check(int max_degree, int nodes = kDefaultNodes);

/// Cross moments at |t| at or above this are flagged; the quadrature loses
/// accuracy as the correlated density concentrates on the diagonal.
inline constexpr double kPrecisionWarningThreshold = 0.999;

struct CrossMoment {
  double value = 0.0;
  bool precision_warning = false;  // |t| >= kPrecisionWarningThreshold
};

/// E[ψ_n(u) ψ_m(v)] for a standard bivariate normal with correlation t, by
/// tensor Gauss–Hermite quadrature.
CrossMoment mehler_cross_moment(int n, int m, double t, int nodes = kDefaultNodes);

/// Multi-index n ∈ ℕ^r with degree Σ n_k.
using HermiteIndex = std::vector<int>;

struct Mode {
  HermiteIndex index;
  int degree = 0;
  double weight = 0.0;  // t_n = Π t_k^{n_k}
};

/// All modes with 1 <= |n| <= max_degree, sorted by weight nonincreasing.
/// Equal weights are ordered by descending lexicographic index.
struct MehlerSpectrum {
  std::vector<double> t;
  int max_degree = 0;
  std::vector<Mode> modes;
};

inline constexpr std::size_t kMaxModes = 1'000'000;

MehlerSpectrum mode_spectrum(std::span<const double> t, int max_degree);

/// CSV with header `index,degree,t_n`; index entries joined by ';'.
void write_mode_spectrum_csv(const MehlerSpectrum& spectrum, std::ostream& out);

struct Dominance {
  double gap = 0.0;  // t_r − t_1²
  bool holds = false;
};

/// First-order dominance t_r > t_1². Always holds for r = 1.
Dominance dominance_check(std::span<const double> t);

/// Whether the r largest mode weights are exactly the first-order indices e_1..e_r.
bool leading_modes_are_linear(std::span<const double> t, int max_degree);

/// φ(x)φ(y) Σ_{n<=D} tⁿ ψ_n(x) ψ_n(y).
double mehler_density_partial_sum(double x, double y, double t, int max_degree);

/// Standard bivariate normal density with correlation t.
double bivariate_normal_density(double x, double y, double t);

}  // namespace mvcca::hermite
