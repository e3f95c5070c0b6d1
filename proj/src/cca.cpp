#include "mvcca/cca.hpp"

#include <string>

#include "mvcca/errors.hpp"
#include "mvcca/kernels.hpp"

namespace mvcca::cca {

namespace {

void require_samples(const ViewDataset& z) {
  if (z.samples() < 2)
    throw InsufficientSamplesError("view " + std::to_string(z.view_index) + ": at least 2 samples are required");
  if (z.dim() < 1) throw DimensionError("view " + std::to_string(z.view_index) + ": empty representation");
}

MatrixXd symmetric_cov(const MatrixXd& x) {
  const MatrixXd c = kernels::omp::centered_cross_covariance(x, x);
  return 0.5 * (c + c.transpose());
}

}  // namespace

Moments empirical_moments(const ViewDataset& zi) {
  require_samples(zi);
  return {kernels::omp::column_means(zi.z), symmetric_cov(zi.z), std::nullopt, std::nullopt, std::nullopt};
}

Moments empirical_moments(const ViewDataset& zi, const ViewDataset& zj) {
  require_samples(zi);
  require_samples(zj);
  if (zi.samples() != zj.samples()) throw DimensionError("empirical_moments: views have different sample counts");
  Moments m = empirical_moments(zi);
  m.mean_j = kernels::omp::column_means(zj.z);
  m.cov_jj = symmetric_cov(zj.z);
  m.cov_ij = kernels::omp::centered_cross_covariance(zi.z, zj.z);
  return m;
}

PairwiseCCAResult empirical_normalized_crosscov(const ViewDataset& zi, const ViewDataset& zj) {
  const Moments m = empirical_moments(zi, zj);
  PairwiseCCAResult out;
  try {
    out.whitener_i = linalg::sym_inv_sqrt(m.cov_ii, kWhiteningFloor);
    out.whitener_j = linalg::sym_inv_sqrt(*m.cov_jj, kWhiteningFloor);
  } catch (const NearSingularError& e) {
    throw NearSingularError("views " + std::to_string(zi.view_index) + "," + std::to_string(zj.view_index) + ": " +
                            e.what());
  }
  out.r_hat = out.whitener_i * *m.cov_ij * out.whitener_j;
  out.svd = linalg::svd_ordered(out.r_hat);
  return out;
}

PairwiseSubspaces pairwise_subspaces(const linalg::SvdResult& svd, Index r) {
  const Index k = svd.singular_values.size();
  if (r < 1 || r > k) throw DimensionError("pairwise_subspaces: rank " + std::to_string(r) + " out of range");
  const double next = r < k ? svd.singular_values(r) : 0.0;
  return {linalg::SubspaceBasis::leading(svd.u, r), linalg::SubspaceBasis::leading(svd.v, r),
          svd.singular_values(r - 1) - next};
}

double gcca_objective(const std::vector<ViewDataset>& views) {
  if (views.size() < 2) throw DimensionError("gcca_objective: at least 2 views are required");
  double total = 0.0;
  for (std::size_t i = 0; i < views.size(); ++i)
    for (std::size_t j = i + 1; j < views.size(); ++j)
      total += empirical_normalized_crosscov(views[i], views[j]).singular_values().sum();
  return total;
}

}  // namespace mvcca::cca
