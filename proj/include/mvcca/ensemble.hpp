#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mvcca/linalg.hpp"
#include "mvcca/rng.hpp"

namespace mvcca {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Index of the unordered view pair {i, j} among the three pairs
/// (0,1) → 0, (0,2) → 1, (1,2) → 2.
std::size_t pair_slot(std::size_t i, std::size_t j);

/// Prescribed canonical correlations for every pair of a 3-view ensemble.
struct TargetSpectra {
  Index r = 0;
  std::array<std::vector<double>, 3> t;  // t12, t13, t23; each length r, nonincreasing
  std::array<Index, 3> view_dims{0, 0, 0};

  /// Entries strictly in (0,1), nonincreasing, lengths r, view dims >= r.
  void validate() const;

  /// Every pair gets the same spectrum `t`.
  static TargetSpectra uniform(const std::vector<double>& t, Index view_dim);
};

nlohmann::json to_json(const TargetSpectra& s);
TargetSpectra spectra_from_json(const nlohmann::json& j);

/// g[i](k): per-view gain for view i and mode k, with g_i g_j = t_ij.
using ViewGains = std::array<VectorXd, 3>;

/// Closed-form inversion g_{i,k} = sqrt(t_ij t_ki / t_jk). Throws
/// InfeasibleSpectrumError when a radicand is <= 0 or a gain reaches 1.
ViewGains solve_per_view_gains(const TargetSpectra& targets);

/// Mixing matrices A_i (d_i × d_C) plus, for constructed ensembles, their
/// factors A_i = U_i diag(σ_i) Pᵀ. `whiteners` holds (A_i A_iᵀ + I)^{-1/2}.
struct MixingEnsemble {
  std::vector<MatrixXd> mixing;
  MatrixXd shared_right;                 // P; empty for direct input
  std::vector<MatrixXd> rotations;       // U_i, d_i × d_i; empty for direct input
  std::vector<VectorXd> singular_values; // σ_i; empty for direct input
  std::vector<MatrixXd> whiteners;

  std::size_t num_views() const noexcept { return mixing.size(); }
  Index latent_dim() const { return mixing.empty() ? 0 : mixing.front().cols(); }
  Index view_dim(std::size_t i) const { return mixing.at(i).rows(); }

  /// General-N ensemble from explicit mixings; computes whiteners.
  static MixingEnsemble from_mixings(std::vector<MatrixXd> mixing);
};

inline constexpr double kPopulationWhiteningFloor = 1e-12;

/// Haar-distributed orthogonal d×d matrix: QR of a Gaussian matrix with the
/// R diagonal made positive.
MatrixXd haar_orthogonal(Index d, std::mt19937_64& engine);

/// σ_{i,k} = g/√(1−g²); U_i and the shared P drawn from `stream`.
MixingEnsemble build_mixing(const ViewGains& gains, const std::array<Index, 3>& view_dims,
                            const SeededStream& stream);

/// Population normalized cross-covariance R_ij = W_i A_i A_jᵀ W_j.
struct PopulationPair {
  MatrixXd r;
  linalg::SvdResult svd;
  Index rank = 0;
};

/// Singular values below 1e-9·max(σ_1, 1) count as zero in `rank`.
Index numerical_rank(const VectorXd& singular_values);

PopulationPair population_normalized_crosscov(const MixingEnsemble& ensemble, std::size_t i, std::size_t j);

}  // namespace mvcca
