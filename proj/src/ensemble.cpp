#include "mvcca/ensemble.hpp"

#include <cmath>
#include <random>
#include <string>

#include "mvcca/errors.hpp"

namespace mvcca {

std::size_t pair_slot(std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  if (i == 0 && j == 1) return 0;
  if (i == 0 && j == 2) return 1;
  if (i == 1 && j == 2) return 2;
  throw DimensionError("pair_slot: not a pair of a 3-view ensemble");
}

void TargetSpectra::validate() const {
  if (r < 1) throw ParameterError("target spectra: r must be >= 1");
  static constexpr const char* kNames[3] = {"t12", "t13", "t23"};
  for (std::size_t p = 0; p < 3; ++p) {
    if (static_cast<Index>(t[p].size()) != r)
      throw ParameterError(std::string("target spectra: ") + kNames[p] + " must have length r");
    for (std::size_t k = 0; k < t[p].size(); ++k) {
      const double v = t[p][k];
      if (!(v > 0.0 && v < 1.0))
        throw ParameterError(std::string("target spectra: ") + kNames[p] + " entries must lie strictly in (0,1)");
      if (k > 0 && v > t[p][k - 1])
        throw ParameterError(std::string("target spectra: ") + kNames[p] + " must be nonincreasing");
    }
  }
  for (Index d : view_dims)
    if (d < r) throw DimensionError("target spectra: every view dimension must be >= r");
}

TargetSpectra TargetSpectra::uniform(const std::vector<double>& t, Index view_dim) {
  TargetSpectra s;
  s.r = static_cast<Index>(t.size());
  s.t = {t, t, t};
  s.view_dims = {view_dim, view_dim, view_dim};
  s.validate();
  return s;
}

nlohmann::json to_json(const TargetSpectra& s) {
  return {{"r", s.r}, {"t12", s.t[0]}, {"t13", s.t[1]}, {"t23", s.t[2]},
          {"dS", {s.view_dims[0], s.view_dims[1], s.view_dims[2]}}};
}

TargetSpectra spectra_from_json(const nlohmann::json& j) {
  TargetSpectra s;
  try {
    s.r = j.at("r").get<Index>();
    s.t = {j.at("t12").get<std::vector<double>>(), j.at("t13").get<std::vector<double>>(),
           j.at("t23").get<std::vector<double>>()};
    const auto dims = j.at("dS").get<std::vector<Index>>();
    if (dims.size() != 3) throw ParameterError("target spectra: dS must list 3 view dimensions");
    s.view_dims = {dims[0], dims[1], dims[2]};
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("target spectra: ") + e.what());
  }
  s.validate();
  return s;
}

ViewGains solve_per_view_gains(const TargetSpectra& targets) {
  targets.validate();
  const auto& t12 = targets.t[0];
  const auto& t13 = targets.t[1];
  const auto& t23 = targets.t[2];
  ViewGains g{VectorXd(targets.r), VectorXd(targets.r), VectorXd(targets.r)};
  for (Index k = 0; k < targets.r; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    // View i pairs with j and l: g_i^2 = t_ij t_il / t_jl.
    const double radicand[3] = {t12[kk] * t13[kk] / t23[kk], t12[kk] * t23[kk] / t13[kk],
                                t13[kk] * t23[kk] / t12[kk]};
    for (std::size_t i = 0; i < 3; ++i) {
      const double gain = radicand[i] > 0.0 ? std::sqrt(radicand[i]) : 0.0;
      if (!(radicand[i] > 0.0) || !(gain < 1.0))
        throw InfeasibleSpectrumError("infeasible target spectra at mode " + std::to_string(k + 1) + ": view " +
                                          std::to_string(i + 1) + " gain " + std::to_string(gain) +
                                          " is outside (0,1)",
                                      i, static_cast<std::size_t>(k));
      g[i](k) = gain;
    }
  }
  return g;
}

MixingEnsemble MixingEnsemble::from_mixings(std::vector<MatrixXd> mixing) {
  if (mixing.size() < 2) throw DimensionError("mixing ensemble needs at least 2 views");
  const Index dc = mixing.front().cols();
  MixingEnsemble e;
  for (const auto& a : mixing) {
    if (a.cols() != dc) throw DimensionError("mixing ensemble: all A_i must share the latent dimension");
    if (a.rows() < 1) throw DimensionError("mixing ensemble: empty view");
    e.whiteners.push_back(linalg::sym_inv_sqrt(a * a.transpose() + MatrixXd::Identity(a.rows(), a.rows()),
                                               kPopulationWhiteningFloor));
  }
  e.mixing = std::move(mixing);
  return e;
}

MatrixXd haar_orthogonal(Index d, std::mt19937_64& engine) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd g(d, d);
  for (Index r = 0; r < d; ++r)
    for (Index c = 0; c < d; ++c) g(r, c) = normal(engine);
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(d, d);
  const MatrixXd& packed = qr.matrixQR();
  for (Index c = 0; c < d; ++c)
    if (packed(c, c) < 0.0) q.col(c) *= -1.0;
  return q;
}

MixingEnsemble build_mixing(const ViewGains& gains, const std::array<Index, 3>& view_dims,
                            const SeededStream& stream) {
  const Index r = gains[0].size();
  if (r < 1 || gains[1].size() != r || gains[2].size() != r)
    throw DimensionError("build_mixing: gains must have equal positive length");
  for (std::size_t i = 0; i < 3; ++i) {
    if (view_dims[i] < r)
      throw DimensionError("build_mixing: view " + std::to_string(i + 1) + " dimension is below the shared rank");
    for (Index k = 0; k < r; ++k)
      if (!(gains[i](k) > 0.0 && gains[i](k) < 1.0)) throw ParameterError("build_mixing: gains must lie in (0,1)");
  }
  auto engine = stream.engine();
  MixingEnsemble e;
  e.shared_right = haar_orthogonal(r, engine);
  std::vector<MatrixXd> mixing;
  for (std::size_t i = 0; i < 3; ++i) {
    const VectorXd g = gains[i];
    const VectorXd sigma = (g.array() / (1.0 - g.array().square()).sqrt()).matrix();
    MatrixXd u = haar_orthogonal(view_dims[i], engine);
    mixing.push_back(u.leftCols(r) * sigma.asDiagonal() * e.shared_right.transpose());
    e.rotations.push_back(std::move(u));
    e.singular_values.push_back(sigma);
  }
  MixingEnsemble built = MixingEnsemble::from_mixings(std::move(mixing));
  e.mixing = std::move(built.mixing);
  e.whiteners = std::move(built.whiteners);
  return e;
}

Index numerical_rank(const VectorXd& singular_values) {
  if (singular_values.size() == 0) return 0;
  const double tol = 1e-9 * std::max(singular_values.maxCoeff(), 1.0);
  return static_cast<Index>((singular_values.array() > tol).count());
}

PopulationPair population_normalized_crosscov(const MixingEnsemble& ensemble, std::size_t i, std::size_t j) {
  if (i >= ensemble.num_views() || j >= ensemble.num_views())
    throw DimensionError("population_normalized_crosscov: view index out of range");
  PopulationPair out;
  out.r = ensemble.whiteners[i] * ensemble.mixing[i] * ensemble.mixing[j].transpose() * ensemble.whiteners[j];
  out.svd = linalg::svd_ordered(out.r);
  out.rank = numerical_rank(out.svd.singular_values);
  return out;
}

}  // namespace mvcca
