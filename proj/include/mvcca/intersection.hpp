#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mvcca/cca.hpp"
#include "mvcca/dataset.hpp"
#include "mvcca/ensemble.hpp"
#include "mvcca/linalg.hpp"

namespace mvcca::intersection {

using linalg::Index;
using linalg::MatrixXd;
using linalg::SubspaceBasis;
using linalg::VectorXd;

inline constexpr double kDefaultRankThreshold = 0.9;
inline constexpr double kLowConfidenceGap = 0.05;

/// Mean of the orthogonal projectors onto `bases`.
MatrixXd averaged_projector(const std::vector<SubspaceBasis>& bases);

struct IntersectionResult {
  MatrixXd s;
  VectorXd eigenvalues;  // nonincreasing
  SubspaceBasis basis;   // top-`rank` eigenvectors of s
  double gap = 0.0;      // 1 − λ_{rank+1}, with λ_{d+1} := 0
  Index rank = 0;
  bool low_confidence = false;  // gap < kLowConfidenceGap
};

IntersectionResult top_eigenspace(const MatrixXd& s, Index r);

/// Number of eigenvalues of `s` at or above `tau`; tau must lie in (0.5, 1).
Index select_rank(const MatrixXd& s, double tau = kDefaultRankThreshold);

/// Symmetric table of pairwise ranks r_ij for an N-view ensemble.
class PairRanks {
 public:
  explicit PairRanks(std::size_t views, Index fill = 0);
  std::size_t views() const noexcept { return views_; }
  Index operator()(std::size_t i, std::size_t j) const;
  void set(std::size_t i, std::size_t j, Index rank);

 private:
  std::size_t views_;
  std::vector<Index> ranks_;
};

/// Pairwise estimate for one unordered pair i < j.
struct PairEstimate {
  std::size_t i = 0;
  std::size_t j = 0;
  MatrixXd r;
  VectorXd singular_values;
  Index rank = 0;
  SubspaceBasis left;   // U_{i|j}
  SubspaceBasis right;  // U_{j|i}
  double gap = 0.0;
};

struct MultiviewRecovery {
  std::vector<PairEstimate> pairs;       // lexicographic (0,1), (0,2), ..., (N-2,N-1)
  std::vector<IntersectionResult> views;

  std::size_t num_views() const noexcept { return views.size(); }
  const PairEstimate& pair(std::size_t i, std::size_t j) const;
  /// Correlated subspace of view i with respect to view j, U_{i|j}.
  const SubspaceBasis& conditional(std::size_t i, std::size_t j) const;
};

/// Empirical intersection filter: pairwise CCA for every pair, averaged
/// projectors per view, top-r_i eigenspace. Missing view ranks are chosen by
/// select_rank(tau).
MultiviewRecovery multiview_recover(const std::vector<ViewDataset>& views, const PairRanks& pair_ranks,
                                    const std::optional<std::vector<Index>>& view_ranks = std::nullopt,
                                    double tau = kDefaultRankThreshold);

/// Population counterpart from the ensemble's exact R_ij. Pair ranks are the
/// numerical ranks of R_ij; missing view ranks are the multiplicity of the
/// eigenvalue 1 of S_i.
MultiviewRecovery population_recover(const MixingEnsemble& ensemble,
                                     const std::optional<std::vector<Index>>& view_ranks = std::nullopt);

/// Pair ranks read off a population recovery.
PairRanks ranks_of(const MultiviewRecovery& recovery);

}  // namespace mvcca::intersection
