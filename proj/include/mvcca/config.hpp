#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mvcca/ensemble.hpp"
#include "mvcca/prior.hpp"
#include "mvcca/views.hpp"

namespace mvcca::harness {

enum class ExperimentKind { Rate, Dominance, Intersection, HermiteCert, Invariance, Estimate, ConstructSpectrum };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// Typed experiment configuration. Every field has a default, so
/// `{"experiment": "rate"}` is a complete document; the effective config
/// (defaults filled in) is what gets hashed and echoed into outputs.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Rate;
  std::uint64_t seed = 0;

  // Ensemble: explicit spectra, explicit mixings, or a planted construction.
  std::optional<TargetSpectra> spectra;
  std::vector<Eigen::MatrixXd> mixings;
  std::string planted;  // "" or "partial_overlap"
  double planted_amplitude = 2.0;
  PriorSpec prior;

  std::vector<Eigen::Index> n_grid;  // rate
  Eigen::Index n = 0;                // other Monte Carlo experiments
  Eigen::Index trials = 0;
  double tau = 0.9;

  // Dominance ablation and Hermite certification.
  std::vector<double> ratios;
  double t1 = 0.8;
  Eigen::Index ablation_rank = 3;
  Eigen::Index ablation_dim = 5;
  int mode_degree = 4;
  int hermite_degree = 6;
  int nodes = 64;
  std::vector<double> t_grid;
  int random_vectors = 500;

  // Invariance.
  std::vector<views::MapConfig> maps;
  int corrupt_view = 0;  // 1-based; 0 disables the negative control

  // Estimate.
  std::vector<std::filesystem::path> datasets;
  std::optional<std::vector<std::vector<Eigen::Index>>> pair_ranks;
  std::optional<std::vector<Eigen::Index>> view_ranks;

  std::map<std::string, double> tolerances;

  /// Parses and fills defaults. Relative dataset paths resolve against `base_dir`.
  static ExperimentConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
  static ExperimentConfig defaults(ExperimentKind kind);

  nlohmann::json to_json() const;
  /// FNV-1a of the key-sorted effective config.
  std::string hash() const;
  double tolerance(const std::string& key, double fallback) const;
};

/// Reads a config file; JSON errors and missing files become ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Ensemble described by a config (spectra, mixings, or planted construction).
MixingEnsemble make_ensemble(const ExperimentConfig& config);

/// Three views of dimension 3 over a 3-dimensional latent: view 1 sees
/// (c1,c2,c3), view 2 sees (c1,c2), view 3 sees (c1,c3), all with gain
/// `amplitude`. View 1 shares span{e1,e2} with view 2 and span{e1,e3} with view 3.
std::vector<Eigen::MatrixXd> planted_partial_overlap(double amplitude);

/// Default 21-point dominance-ratio grid (24 + k)/40, k = 0..20.
std::vector<double> default_ratio_grid();

}  // namespace mvcca::harness
