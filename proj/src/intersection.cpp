#include "mvcca/intersection.hpp"

#include <exception>
#include <functional>
#include <string>

#include "mvcca/errors.hpp"

namespace mvcca::intersection {

MatrixXd averaged_projector(const std::vector<SubspaceBasis>& bases) {
  if (bases.empty()) throw DimensionError("averaged_projector: no bases");
  const Index d = bases.front().ambient_dim();
  MatrixXd s = MatrixXd::Zero(d, d);
  for (const auto& b : bases) {
    if (b.ambient_dim() != d) throw DimensionError("averaged_projector: ambient dimensions differ");
    s += linalg::projector(b);
  }
  s /= static_cast<double>(bases.size());
  return 0.5 * (s + s.transpose());
}

IntersectionResult top_eigenspace(const MatrixXd& s, Index r) {
  if (r < 1 || r > s.rows()) throw DimensionError("top_eigenspace: rank " + std::to_string(r) + " out of range");
  const auto eig = linalg::sym_eigen_descending(s);
  IntersectionResult out;
  out.s = s;
  out.eigenvalues = eig.values;
  out.basis = SubspaceBasis::leading(eig.vectors, r);
  out.rank = r;
  out.gap = 1.0 - (r < s.rows() ? eig.values(r) : 0.0);
  out.low_confidence = out.gap < kLowConfidenceGap;
  return out;
}

Index select_rank(const MatrixXd& s, double tau) {
  if (!(tau > 0.5 && tau < 1.0)) throw ParameterError("select_rank: threshold must lie in (0.5, 1)");
  const auto eig = linalg::sym_eigen_descending(s);
  return static_cast<Index>((eig.values.array() >= tau).count());
}

PairRanks::PairRanks(std::size_t views, Index fill) : views_(views), ranks_(views * views, fill) {}

Index PairRanks::operator()(std::size_t i, std::size_t j) const {
  if (i >= views_ || j >= views_ || i == j) throw DimensionError("PairRanks: invalid pair");
  return ranks_[i * views_ + j];
}

void PairRanks::set(std::size_t i, std::size_t j, Index rank) {
  if (i >= views_ || j >= views_ || i == j) throw DimensionError("PairRanks: invalid pair");
  ranks_[i * views_ + j] = rank;
  ranks_[j * views_ + i] = rank;
}

const PairEstimate& MultiviewRecovery::pair(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  for (const auto& p : pairs)
    if (p.i == i && p.j == j) return p;
  throw DimensionError("MultiviewRecovery: no estimate for pair");
}

const SubspaceBasis& MultiviewRecovery::conditional(std::size_t i, std::size_t j) const {
  const auto& p = pair(i, j);
  return i < j ? p.left : p.right;
}

namespace {

std::vector<std::pair<std::size_t, std::size_t>> all_pairs(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out.emplace_back(i, j);
  return out;
}

PairEstimate make_estimate(std::size_t i, std::size_t j, MatrixXd r, const linalg::SvdResult& svd, Index rank) {
  auto sub = cca::pairwise_subspaces(svd, rank);
  return {i, j, std::move(r), svd.singular_values, rank, std::move(sub.left), std::move(sub.right), sub.gap};
}

// Aggregates pairwise subspaces into per-view intersection results.
void aggregate(MultiviewRecovery& rec, std::size_t n, const std::optional<std::vector<Index>>& view_ranks,
               const std::function<Index(const MatrixXd&)>& default_rank) {
  if (view_ranks && view_ranks->size() != n) throw DimensionError("multiview: one rank per view is required");
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<SubspaceBasis> bases;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) bases.push_back(rec.conditional(i, j));
    const MatrixXd s = averaged_projector(bases);
    const Index r = view_ranks ? (*view_ranks)[i] : default_rank(s);
    if (r < 1)
      throw DimensionError("view " + std::to_string(i) + ": jointly correlated subspace is empty at this threshold");
    rec.views.push_back(top_eigenspace(s, r));
  }
}

}  // namespace

MultiviewRecovery multiview_recover(const std::vector<ViewDataset>& views, const PairRanks& pair_ranks,
                                    const std::optional<std::vector<Index>>& view_ranks, double tau) {
  const std::size_t n = views.size();
  if (n < 2) throw DimensionError("multiview_recover: at least 2 views are required");
  if (pair_ranks.views() != n) throw DimensionError("multiview_recover: rank table does not match view count");
  const auto pairs = all_pairs(n);
  MultiviewRecovery rec;
  rec.pairs.resize(pairs.size());
  std::vector<std::exception_ptr> failures(pairs.size());
  const auto count = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t p = 0; p < count; ++p) {
    const auto [i, j] = pairs[static_cast<std::size_t>(p)];
    try {
      auto res = cca::empirical_normalized_crosscov(views[i], views[j]);
      rec.pairs[static_cast<std::size_t>(p)] = make_estimate(i, j, std::move(res.r_hat), res.svd, pair_ranks(i, j));
    } catch (...) {
      failures[static_cast<std::size_t>(p)] = std::current_exception();
    }
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  aggregate(rec, n, view_ranks, [tau](const MatrixXd& s) { return select_rank(s, tau); });
  return rec;
}

MultiviewRecovery population_recover(const MixingEnsemble& ensemble, const std::optional<std::vector<Index>>& view_ranks) {
  const std::size_t n = ensemble.num_views();
  if (n < 2) throw DimensionError("population_recover: at least 2 views are required");
  MultiviewRecovery rec;
  for (const auto& [i, j] : all_pairs(n)) {
    auto pop = population_normalized_crosscov(ensemble, i, j);
    if (pop.rank < 1)
      throw DimensionError("views " + std::to_string(i) + "," + std::to_string(j) + " share no correlated signal");
    rec.pairs.push_back(make_estimate(i, j, std::move(pop.r), pop.svd, pop.rank));
  }
  aggregate(rec, n, view_ranks, [](const MatrixXd& s) {
    const auto eig = linalg::sym_eigen_descending(s);
    return static_cast<Index>((eig.values.array() >= 1.0 - 1e-8).count());
  });
  return rec;
}

PairRanks ranks_of(const MultiviewRecovery& recovery) {
  PairRanks ranks(recovery.num_views());
  for (const auto& p : recovery.pairs) ranks.set(p.i, p.j, p.rank);
  return ranks;
}

}  // namespace mvcca::intersection
