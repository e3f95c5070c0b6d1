#pragma once

#include <vector>

#include "mvcca/config.hpp"
#include "mvcca/record.hpp"

namespace mvcca::harness {

const char* library_version();

/// Dispatches on config.kind.
RunRecord run_experiment(const ExperimentConfig& config);

/// Finite-sample rate sweep: pairwise and multi-view sin-Θ against ground
/// truth for every n in the grid, with a log-log slope fit of the medians.
RunRecord run_rate_experiment(const ExperimentConfig& config);

/// Mode-ordering flip and source-level recovery across dominance ratios t_r/t_1².
RunRecord run_dominance_ablation(const ExperimentConfig& config);

/// Intersection filter with the perturbation-bound chain checked per trial.
RunRecord run_intersection_experiment(const ExperimentConfig& config);

/// Quadrature certification of the Hermite basis and the Mehler cross-moments,
/// plus the dominance / leading-mode agreement table.
RunRecord run_hermite_cert(const ExperimentConfig& config);

/// Observation-level wiring check through random invertible generators.
RunRecord run_invariance_experiment(const ExperimentConfig& config);

/// Intersection filter on user-supplied view datasets.
RunRecord run_estimate(const ExperimentConfig& config);

/// Gains, mixings and the population spectra implied by target spectra.
RunRecord run_construct_spectrum(const ExperimentConfig& config);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

/// Least squares of log10(err) on log10(n).
SlopeFit fit_log_slope(const std::vector<double>& n, const std::vector<double>& err);

double median(std::vector<double> values);

}  // namespace mvcca::harness
