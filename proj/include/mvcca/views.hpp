#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mvcca/ensemble.hpp"
#include "mvcca/prior.hpp"
#include "mvcca/rng.hpp"

namespace mvcca::views {

using Eigen::Index;
using Eigen::MatrixXd;

/// Strictly increasing coordinatewise maps with derivative >= 1.
enum class CoordinateMap {
  Identity,    // x
  TanhLinear,  // x + α tanh(βx)
  CubicLinear  // x + γx³
};

std::string to_string(CoordinateMap m);
CoordinateMap coordinate_map_from_string(const std::string& name);

/// g(s) = post · ψ(pre · s), applied to each sample (row).
struct InvertibleMapSpec {
  MatrixXd pre_rotation;
  std::vector<CoordinateMap> coordinate;  // one entry per dimension
  MatrixXd post_rotation;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;

  Index dim() const noexcept { return pre_rotation.rows(); }
  void validate() const;

  double forward(Index k, double x) const;
  double derivative(Index k, double x) const;
  /// Safeguarded Newton with bracket expansion; tolerance 1e-12 relative.
  double inverse(Index k, double y) const;
};

/// JSON form used by experiment configs:
/// {"pre": "random|identity", "menu": ["identity"|"tanh"|"cubic", ...],
///  "post": "random|identity", "alpha": α, "beta": β, "gamma": γ}.
/// The menu is cycled over coordinates when shorter than d.
struct MapConfig {
  bool random_pre = false;
  std::vector<CoordinateMap> menu{CoordinateMap::Identity};
  bool random_post = false;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
};

MapConfig map_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MapConfig& c);

/// Concrete spec for dimension d; random rotations are Haar draws from `stream`.
InvertibleMapSpec make_map_spec(const MapConfig& config, Index d, const SeededStream& stream);

/// A random menu spec: random rotations, per-coordinate map and α, β, γ in [0.25, 2].
InvertibleMapSpec random_map_spec(Index d, const SeededStream& stream);

/// Observations x_t = g(s_t) for every row of `sources`.
MatrixXd apply_generator(const InvertibleMapSpec& spec, const MatrixXd& sources);

/// Oracle inverse: s_t = g⁻¹(x_t).
MatrixXd oracle_encode(const InvertibleMapSpec& spec, const MatrixXd& observations);

namespace serial {
MatrixXd apply_generator(const InvertibleMapSpec& spec, const MatrixXd& sources);
MatrixXd oracle_encode(const InvertibleMapSpec& spec, const MatrixXd& observations);
}  // namespace serial

struct InvarianceReport {
  std::vector<double> view_moment_deviation;  // max |Σ̂_ii| and mean deviation per view
  std::vector<double> pair_moment_deviation;  // max |Σ̂_ij| and |R̂_ij| deviation per pair i<j
  double max_moment_deviation = 0.0;
  double max_roundtrip_error = 0.0;
  double tolerance = 1e-10;
  bool passed = true;
  std::optional<std::size_t> failing_view;

  /// Throws WiringError naming the first failing view.
  void throw_if_failed() const;
};

/// Samples sources, pushes them through the generators, oracle-encodes them
/// back (with `decoders` when given, else the generators themselves) and
/// compares every second moment and R̂_ij against the source-level values.
InvarianceReport invariance_check(const MixingEnsemble& ensemble, const std::vector<InvertibleMapSpec>& generators,
                                  const PriorSpec& prior, Index n, const SeededStream& stream,
                                  const std::vector<InvertibleMapSpec>* decoders = nullptr,
                                  double tolerance = 1e-10);

}  // namespace mvcca::views
