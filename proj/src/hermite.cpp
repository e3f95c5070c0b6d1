#include "mvcca/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "mvcca/errors.hpp"

namespace mvcca::hermite {

namespace {

void check_correlations(std::span<const double> t) {
  if (t.empty()) throw ParameterError("correlation vector is empty");
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!(t[k] > 0.0 && t[k] < 1.0)) throw ParameterError("correlations must lie in (0,1)");
    if (k > 0 && t[k] > t[k - 1]) throw ParameterError("correlations must be nonincreasing");
  }
}

// Orthonormal Hermite functions for e^{-z²}: p_0 = π^{-1/4},
// p_{k+1} = z √(2/(k+1)) p_k − √(k/(k+1)) p_{k−1}.
void physicists_orthonormal(int max_degree, double z, std::vector<double>& p) {
  p.assign(static_cast<std::size_t>(max_degree) + 1, 0.0);
  p[0] = std::pow(std::numbers::pi, -0.25);
  if (max_degree >= 1) p[1] = std::sqrt(2.0) * z * p[0];
  for (int k = 1; k < max_degree; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    p[ku + 1] = z * std::sqrt(2.0 / (k + 1)) * p[ku] - std::sqrt(static_cast<double>(k) / (k + 1)) * p[ku - 1];
  }
}

}  // namespace

double psi(int n, double x) {
  if (n < 0) throw ParameterError("psi: degree must be nonnegative");
  if (n == 0) return 1.0;
  double prev = 1.0, cur = x;
  for (int k = 1; k < n; ++k) {
    const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(static_cast<double>(k + 1));
    prev = cur;
    cur = next;
  }
  return cur;
}

void psi_all(int max_degree, double x, std::span<double> out) {
  if (max_degree < 0 || out.size() < static_cast<std::size_t>(max_degree) + 1)
    throw ParameterError("psi_all: output span too small");
  out[0] = 1.0;
  if (max_degree >= 1) out[1] = x;
  for (int k = 1; k < max_degree; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    out[ku + 1] = (x * out[ku] - std::sqrt(static_cast<double>(k)) * out[ku - 1]) / std::sqrt(static_cast<double>(k + 1));
  }
}

QuadratureRule gauss_hermite(int nodes) {
  if (nodes < 1) throw QuadratureError("gauss_hermite: need at least one node");
  const auto q = static_cast<Eigen::Index>(nodes);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd sub(std::max<Eigen::Index>(q - 1, 0));
  for (Eigen::Index k = 0; k + 1 < q; ++k) sub(k) = std::sqrt(static_cast<double>(k + 1) / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw QuadratureError("gauss_hermite: eigenvalue solver failed");

  QuadratureRule rule;
  std::vector<double> p;
  for (Eigen::Index k = 0; k < q; ++k) {
    double z = es.eigenvalues()(k);
    for (int it = 0; it < 3; ++it) {
      physicists_orthonormal(nodes, z, p);
      // p_Q'(z) = √(2Q) p_{Q−1}(z)
      const double deriv = std::sqrt(2.0 * nodes) * p[static_cast<std::size_t>(nodes) - 1];
      if (deriv == 0.0) break;
      z -= p[static_cast<std::size_t>(nodes)] / deriv;
    }
    physicists_orthonormal(nodes - 1, z, p);
    double sum = 0.0;
    for (double v : p) sum += v * v;
    rule.nodes.push_back(z);
    rule.weights.push_back(1.0 / sum);
  }
  return rule;
}

QuadratureRule standard_normal_rule(int nodes) {
  QuadratureRule rule = gauss_hermite(nodes);
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  for (auto& x : rule.nodes) x *= std::sqrt(2.0);
  for (auto& w : rule.weights) w *= inv_sqrt_pi;
  return rule;
}

double orthonormality_check(int max_degree, int nodes) {
  if (max_degree < 0) throw ParameterError("orthonormality_check: negative degree");
  if (nodes < max_degree + 1)
    throw QuadratureError("orthonormality_check: " + std::to_string(nodes) + " nodes cannot integrate degree " +
                          std::to_string(2 * max_degree) + " exactly");
  const auto rule = standard_normal_rule(nodes);
  const auto dim = static_cast<std::size_t>(max_degree) + 1;
  std::vector<double> gram(dim * dim, 0.0), values(dim);
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    psi_all(max_degree, rule.nodes[k], values);
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < dim; ++b) gram[a * dim + b] += rule.weights[k] * values[a] * values[b];
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b) worst = std::max(worst, std::abs(gram[a * dim + b] - (a == b ? 1.0 : 0.0)));
  return worst;
}

CrossMoment mehler_cross_moment(int n, int m, double t, int nodes) {
  if (n < 0 || m < 0) throw ParameterError("mehler_cross_moment: degrees must be nonnegative");
  if (!(std::abs(t) < 1.0)) throw ParameterError("mehler_cross_moment: |t| must be < 1");
  if (2 * nodes < n + m + 2) throw QuadratureError("mehler_cross_moment: too few nodes for these degrees");
  const auto rule = standard_normal_rule(nodes);
  // (u, v) = (x, t x + √(1−t²) y) with x, y independent standard normals.
  const double s = std::sqrt(1.0 - t * t);
  double acc = 0.0;
  for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
    const double u = rule.nodes[a];
    const double pu = psi(n, u);
    double inner = 0.0;
    for (std::size_t b = 0; b < rule.nodes.size(); ++b) inner += rule.weights[b] * psi(m, t * u + s * rule.nodes[b]);
    acc += rule.weights[a] * pu * inner;
  }
  return {acc, std::abs(t) >= kPrecisionWarningThreshold};
}

MehlerSpectrum mode_spectrum(std::span<const double> t, int max_degree) {
  check_correlations(t);
  if (max_degree < 1) throw ParameterError("mode_spectrum: max degree must be >= 1");
  // Modes with |n| <= D number C(D + r, r); the zero index is excluded.
  const std::size_t r = t.size();
  double count = 1.0;
  for (std::size_t k = 1; k <= r; ++k) {
    count = count * static_cast<double>(max_degree + static_cast<int>(k)) / static_cast<double>(k);
    if (count > 2.0 * static_cast<double>(kMaxModes)) break;
  }
  if (count - 1.0 > static_cast<double>(kMaxModes))
    throw SizeError("mode_spectrum: more than " + std::to_string(kMaxModes) + " modes");

  MehlerSpectrum out{{t.begin(), t.end()}, max_degree, {}};
  HermiteIndex index(r, 0);
  // Odometer over all indices with total degree <= D.
  while (true) {
    std::size_t k = 0;
    int degree = 0;
    for (int v : index) degree += v;
    while (k < r) {
      if (degree < max_degree) {
        ++index[k];
        break;
      }
      degree -= index[k];
      index[k] = 0;
      ++k;
    }
    if (k == r) break;
    int total = 0;
    double weight = 1.0;
    for (std::size_t c = 0; c < r; ++c) {
      total += index[c];
      for (int p = 0; p < index[c]; ++p) weight *= t[c];
    }
    out.modes.push_back({index, total, weight});
  }
  std::sort(out.modes.begin(), out.modes.end(), [](const Mode& a, const Mode& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.index > b.index;
  });
  return out;
}

void write_mode_spectrum_csv(const MehlerSpectrum& spectrum, std::ostream& out) {
  out << "index,degree,t_n\n";
  char buf[40];
  for (const auto& mode : spectrum.modes) {
    for (std::size_t k = 0; k < mode.index.size(); ++k) out << (k ? ";" : "") << mode.index[k];
    std::snprintf(buf, sizeof buf, "%.17g", mode.weight);
    out << ',' << mode.degree << ',' << buf << '\n';
  }
}

Dominance dominance_check(std::span<const double> t) {
  check_correlations(t);
  const double first_sq = t.front() * t.front();
  const double gap = t.back() - first_sq;
  return {gap, t.size() == 1 || t.back() > first_sq};
}

bool leading_modes_are_linear(std::span<const double> t, int max_degree) {
  if (max_degree < 2) throw ParameterError("leading_modes_are_linear: max degree must be >= 2");
  const auto spectrum = mode_spectrum(t, max_degree);
  for (std::size_t k = 0; k < t.size(); ++k)
    if (spectrum.modes[k].degree != 1) return false;
  return true;
}

double bivariate_normal_density(double x, double y, double t) {
  const double s2 = 1.0 - t * t;
  return std::exp(-(x * x - 2.0 * t * x * y + y * y) / (2.0 * s2)) / (2.0 * std::numbers::pi * std::sqrt(s2));
}

double mehler_density_partial_sum(double x, double y, double t, int max_degree) {
  if (max_degree < 0) throw ParameterError("mehler_density_partial_sum: negative degree");
  std::vector<double> px(static_cast<std::size_t>(max_degree) + 1), py(px.size());
  psi_all(max_degree, x, px);
  psi_all(max_degree, y, py);
  double series = 0.0, tn = 1.0;
  for (std::size_t n = 0; n < px.size(); ++n) {
    series += tn * px[n] * py[n];
    tn *= t;
  }
  const double phi = std::exp(-(x * x + y * y) / 2.0) / (2.0 * std::numbers::pi);
  return phi * series;
}

}  // namespace mvcca::hermite
