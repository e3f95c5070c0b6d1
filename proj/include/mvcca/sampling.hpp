#pragma once

#include <vector>

#include "mvcca/dataset.hpp"
#include "mvcca/ensemble.hpp"
#include "mvcca/prior.hpp"
#include "mvcca/rng.hpp"

namespace mvcca {

/// Source-level samples s_i = A_i c + ε_i for every view of `ensemble`.
///
/// The shared latent c is drawn from stream.substream(0) and the noise of
/// view i from stream.substream(i + 1); row t of every view uses the same c.
std::vector<ViewDataset> sample_sources(const MixingEnsemble& ensemble, const PriorSpec& prior, Index n,
                                        const SeededStream& stream);

}  // namespace mvcca
