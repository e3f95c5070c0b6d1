#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "mvcca/rng.hpp"

namespace mvcca {

enum class PriorFamily { Gaussian, Gamma, Poisson, NegativeBinomial, Hypergeometric };

/// Latent prior family, always consumed in standardized form (mean 0, variance 1).
///
/// Standardization uses the family's closed-form moments, never sample moments.
struct PriorSpec {
  PriorFamily family = PriorFamily::Gaussian;
  double shape = 1.0;             // Gamma
  double rate = 1.0;              // Poisson
  std::int64_t successes = 1;     // NegativeBinomial: number of successes
  double prob = 0.5;              // NegativeBinomial: success probability
  std::int64_t population = 2;    // Hypergeometric
  std::int64_t marked = 1;        // Hypergeometric: successes in population
  std::int64_t draws = 1;         // Hypergeometric

  static PriorSpec gaussian();
  static PriorSpec gamma(double shape);
  static PriorSpec poisson(double rate);
  static PriorSpec negative_binomial(std::int64_t successes, double prob);
  static PriorSpec hypergeometric(std::int64_t population, std::int64_t marked, std::int64_t draws);

  /// Throws ParameterError when a parameter is out of domain or the family
  /// has zero variance.
  void validate() const;

  double raw_mean() const;
  double raw_sd() const;
  double standardize(double raw) const { return (raw - raw_mean()) / raw_sd(); }

  std::string name() const;
};

nlohmann::json to_json(const PriorSpec& prior);
PriorSpec prior_from_json(const nlohmann::json& j);

/// n×d matrix of i.i.d. standardized draws, filled row by row from `stream`.
Eigen::MatrixXd sample_standardized(const PriorSpec& prior, Eigen::Index rows, Eigen::Index cols,
                                    const SeededStream& stream);

}  // namespace mvcca
