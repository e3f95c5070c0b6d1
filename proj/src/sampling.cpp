#include "mvcca/sampling.hpp"

#include "mvcca/errors.hpp"

namespace mvcca {

std::vector<ViewDataset> sample_sources(const MixingEnsemble& ensemble, const PriorSpec& prior, Index n,
                                        const SeededStream& stream) {
  if (ensemble.num_views() == 0) throw DimensionError("sample_sources: empty ensemble");
  const MatrixXd shared = sample_standardized(prior, n, ensemble.latent_dim(), stream.substream(0));
  const auto views = static_cast<Index>(ensemble.num_views());
  std::vector<ViewDataset> out(ensemble.num_views());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < views; ++i) {
    const auto v = static_cast<std::size_t>(i);
    MatrixXd z = sample_standardized(prior, n, ensemble.view_dim(v), stream.substream(v + 1));
    z.noalias() += shared * ensemble.mixing[v].transpose();
    out[v] = ViewDataset{std::move(z), v};
  }
  return out;
}

}  // namespace mvcca
