#pragma once

#include <optional>
#include <vector>

#include "mvcca/dataset.hpp"
#include "mvcca/linalg.hpp"

namespace mvcca::cca {

using linalg::Index;
using linalg::MatrixXd;
using linalg::VectorXd;

/// Covariance eigenvalues at or below this are treated as collapse.
inline constexpr double kWhiteningFloor = 1e-10;

/// Sample means and 1/n-normalized covariances.
struct Moments {
  VectorXd mean_i;
  MatrixXd cov_ii;
  std::optional<VectorXd> mean_j;
  std::optional<MatrixXd> cov_jj;
  std::optional<MatrixXd> cov_ij;
};

Moments empirical_moments(const ViewDataset& zi);
Moments empirical_moments(const ViewDataset& zi, const ViewDataset& zj);

/// Whitened cross-covariance Σ̂_ii^{-1/2} Σ̂_ij Σ̂_jj^{-1/2} and its full SVD.
struct PairwiseCCAResult {
  MatrixXd r_hat;
  linalg::SvdResult svd;
  MatrixXd whitener_i;
  MatrixXd whitener_j;

  const VectorXd& singular_values() const noexcept { return svd.singular_values; }
};

PairwiseCCAResult empirical_normalized_crosscov(const ViewDataset& zi, const ViewDataset& zj);

/// Leading rank-r singular subspaces and the gap σ_r − σ_{r+1} (σ_{k+1} := 0
/// past the last singular value).
struct PairwiseSubspaces {
  linalg::SubspaceBasis left;
  linalg::SubspaceBasis right;
  double gap = 0.0;
};

PairwiseSubspaces pairwise_subspaces(const linalg::SvdResult& svd, Index r);
inline PairwiseSubspaces pairwise_subspaces(const PairwiseCCAResult& result, Index r) {
  return pairwise_subspaces(result.svd, r);
}

/// Σ_{i<j} ‖R̂_ij‖_* over every pair of views.
double gcca_objective(const std::vector<ViewDataset>& views);

}  // namespace mvcca::cca
