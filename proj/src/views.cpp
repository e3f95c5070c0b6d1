#include "mvcca/views.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mvcca/cca.hpp"
#include "mvcca/errors.hpp"
#include "mvcca/kernels.hpp"
#include "mvcca/sampling.hpp"

namespace mvcca::views {

std::string to_string(CoordinateMap m) {
  switch (m) {
    case CoordinateMap::Identity: return "identity";
    case CoordinateMap::TanhLinear: return "tanh";
    case CoordinateMap::CubicLinear: return "cubic";
  }
  return "identity";
}

CoordinateMap coordinate_map_from_string(const std::string& name) {
  if (name == "identity") return CoordinateMap::Identity;
  if (name == "tanh") return CoordinateMap::TanhLinear;
  if (name == "cubic") return CoordinateMap::CubicLinear;
  throw ParameterError("unknown coordinate map '" + name + "' (expected identity, tanh or cubic)");
}

namespace {

bool is_orthogonal(const MatrixXd& q) {
  return q.rows() == q.cols() &&
         (q.transpose() * q - MatrixXd::Identity(q.rows(), q.cols())).cwiseAbs().maxCoeff() <= 1e-10;
}

}  // namespace

void InvertibleMapSpec::validate() const {
  const Index d = pre_rotation.rows();
  if (d < 1) throw DimensionError("map spec: empty dimension");
  if (!is_orthogonal(pre_rotation) || !is_orthogonal(post_rotation) || post_rotation.rows() != d)
    throw ParameterError("map spec: rotations must be d×d orthogonal");
  if (static_cast<Index>(coordinate.size()) != d) throw DimensionError("map spec: one coordinate map per dimension");
  if (!(alpha > 0.0 && beta > 0.0 && gamma > 0.0)) throw ParameterError("map spec: alpha, beta, gamma must be positive");
}

double InvertibleMapSpec::forward(Index k, double x) const {
  switch (coordinate[static_cast<std::size_t>(k)]) {
    case CoordinateMap::Identity: return x;
    case CoordinateMap::TanhLinear: return x + alpha * std::tanh(beta * x);
    case CoordinateMap::CubicLinear: return x + gamma * x * x * x;
  }
  return x;
}

double InvertibleMapSpec::derivative(Index k, double x) const {
  switch (coordinate[static_cast<std::size_t>(k)]) {
    case CoordinateMap::Identity: return 1.0;
    case CoordinateMap::TanhLinear: {
      const double c = std::cosh(beta * x);
      return 1.0 + alpha * beta / (c * c);
    }
    case CoordinateMap::CubicLinear: return 1.0 + 3.0 * gamma * x * x;
  }
  return 1.0;
}

double InvertibleMapSpec::inverse(Index k, double y) const {
  if (!std::isfinite(y)) throw InversionError("map inverse: non-finite observation");
  if (coordinate[static_cast<std::size_t>(k)] == CoordinateMap::Identity) return y;
  // Bracket the root, expanding geometrically.
  double lo = y - 1.0, hi = y + 1.0;
  for (double width = 1.0; forward(k, lo) > y; width *= 2.0) lo = y - 2.0 * width;
  for (double width = 1.0; forward(k, hi) < y; width *= 2.0) hi = y + 2.0 * width;
  double x = std::clamp(y, lo, hi);
  for (int it = 0; it < 100; ++it) {
    const double residual = forward(k, x) - y;
    if (residual == 0.0) return x;
    if (residual > 0.0) hi = x; else lo = x;
    double next = x - residual / derivative(k, x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step <= 1e-12 * std::max(1.0, std::abs(x))) {
      // One polishing Newton step past the tolerance.
      return x - (forward(k, x) - y) / derivative(k, x);
    }
  }
  throw InversionError("map inverse: Newton did not converge in 100 iterations");
}

MapConfig map_config_from_json(const nlohmann::json& j) {
  MapConfig c;
  auto rotation_kind = [&](const char* key) {
    const std::string v = j.value(key, std::string("identity"));
    if (v != "random" && v != "identity") throw ParameterError(std::string("map config: '") + key + "' must be random or identity");
    return v == "random";
  };
  c.random_pre = rotation_kind("pre");
  c.random_post = rotation_kind("post");
  if (j.contains("menu")) {
    c.menu.clear();
    for (const auto& m : j.at("menu")) c.menu.push_back(coordinate_map_from_string(m.get<std::string>()));
    if (c.menu.empty()) throw ParameterError("map config: menu must not be empty");
  }
  c.alpha = j.value("alpha", 1.0);
  c.beta = j.value("beta", 1.0);
  c.gamma = j.value("gamma", 1.0);
  if (!(c.alpha > 0.0 && c.beta > 0.0 && c.gamma > 0.0))
    throw ParameterError("map config: alpha, beta, gamma must be positive");
  return c;
}

nlohmann::json to_json(const MapConfig& c) {
  nlohmann::json menu = nlohmann::json::array();
  for (auto m : c.menu) menu.push_back(to_string(m));
  return {{"pre", c.random_pre ? "random" : "identity"}, {"menu", menu},
          {"post", c.random_post ? "random" : "identity"}, {"alpha", c.alpha}, {"beta", c.beta}, {"gamma", c.gamma}};
}

InvertibleMapSpec make_map_spec(const MapConfig& config, Index d, const SeededStream& stream) {
  auto engine = stream.engine();
  InvertibleMapSpec spec;
  spec.pre_rotation = config.random_pre ? haar_orthogonal(d, engine) : MatrixXd::Identity(d, d);
  spec.post_rotation = config.random_post ? haar_orthogonal(d, engine) : MatrixXd::Identity(d, d);
  for (Index k = 0; k < d; ++k) spec.coordinate.push_back(config.menu[static_cast<std::size_t>(k) % config.menu.size()]);
  spec.alpha = config.alpha;
  spec.beta = config.beta;
  spec.gamma = config.gamma;
  spec.validate();
  return spec;
}

InvertibleMapSpec random_map_spec(Index d, const SeededStream& stream) {
  auto engine = stream.engine();
  std::uniform_real_distribution<double> param(0.25, 2.0);
  std::uniform_int_distribution<int> pick(0, 2);
  InvertibleMapSpec spec;
  spec.pre_rotation = haar_orthogonal(d, engine);
  spec.post_rotation = haar_orthogonal(d, engine);
  for (Index k = 0; k < d; ++k) spec.coordinate.push_back(static_cast<CoordinateMap>(pick(engine)));
  spec.alpha = param(engine);
  spec.beta = param(engine);
  spec.gamma = param(engine);
  spec.validate();
  return spec;
}

namespace {

auto forward_row(const InvertibleMapSpec& spec) {
  return [&spec](const auto& s) -> Eigen::RowVectorXd {
    Eigen::RowVectorXd y = s * spec.pre_rotation.transpose();
    for (Index k = 0; k < y.size(); ++k) y(k) = spec.forward(k, y(k));
    return y * spec.post_rotation.transpose();
  };
}

auto inverse_row(const InvertibleMapSpec& spec) {
  return [&spec](const auto& x) -> Eigen::RowVectorXd {
    Eigen::RowVectorXd y = x * spec.post_rotation;
    for (Index k = 0; k < y.size(); ++k) y(k) = spec.inverse(k, y(k));
    return y * spec.pre_rotation;
  };
}

void check_shape(const InvertibleMapSpec& spec, const MatrixXd& m) {
  spec.validate();
  if (m.cols() != spec.dim()) throw DimensionError("generator: data dimension does not match the map spec");
}

}  // namespace

MatrixXd apply_generator(const InvertibleMapSpec& spec, const MatrixXd& sources) {
  check_shape(spec, sources);
  MatrixXd out(sources.rows(), sources.cols());
  kernels::omp::map_rows(sources, out, forward_row(spec));
  return out;
}

MatrixXd oracle_encode(const InvertibleMapSpec& spec, const MatrixXd& observations) {
  check_shape(spec, observations);
  MatrixXd out(observations.rows(), observations.cols());
  // Exceptions cannot leave an OpenMP region; collect and rethrow.
  bool failed = false;
  kernels::omp::map_rows(observations, out, [&](const auto& x) -> Eigen::RowVectorXd {
    try {
      return inverse_row(spec)(x);
    } catch (const InversionError&) {
#pragma omp atomic write
      failed = true;
      return Eigen::RowVectorXd::Constant(x.size(), std::nan(""));
    }
  });
  if (failed) throw InversionError("oracle_encode: coordinate inversion failed");
  return out;
}

namespace serial {

MatrixXd apply_generator(const InvertibleMapSpec& spec, const MatrixXd& sources) {
  check_shape(spec, sources);
  MatrixXd out(sources.rows(), sources.cols());
  kernels::serial::map_rows(sources, out, forward_row(spec));
  return out;
}

MatrixXd oracle_encode(const InvertibleMapSpec& spec, const MatrixXd& observations) {
  check_shape(spec, observations);
  MatrixXd out(observations.rows(), observations.cols());
  kernels::serial::map_rows(observations, out, inverse_row(spec));
  return out;
}

}  // namespace serial

void InvarianceReport::throw_if_failed() const {
  if (passed) return;
  const std::size_t view = failing_view.value_or(0);
  throw WiringError("reparameterization wiring failed at view " + std::to_string(view + 1) +
                        ": moment deviation " + std::to_string(max_moment_deviation) + " exceeds tolerance",
                    view);
}

InvarianceReport invariance_check(const MixingEnsemble& ensemble, const std::vector<InvertibleMapSpec>& generators,
                                  const PriorSpec& prior, Index n, const SeededStream& stream,
                                  const std::vector<InvertibleMapSpec>* decoders, double tolerance) {
  const std::size_t views = ensemble.num_views();
  if (generators.size() != views) throw DimensionError("invariance_check: one generator per view is required");
  const auto& inverse_specs = decoders ? *decoders : generators;
  if (inverse_specs.size() != views) throw DimensionError("invariance_check: one decoder per view is required");

  const auto sources = sample_sources(ensemble, prior, n, stream);
  std::vector<ViewDataset> encoded;
  InvarianceReport report;
  report.tolerance = tolerance;
  for (std::size_t i = 0; i < views; ++i) {
    const MatrixXd x = apply_generator(generators[i], sources[i].z);
    encoded.push_back({oracle_encode(inverse_specs[i], x), i});
    report.max_roundtrip_error =
        std::max(report.max_roundtrip_error, (encoded[i].z - sources[i].z).cwiseAbs().maxCoeff());
  }
  auto max_abs = [](const auto& a, const auto& b) { return (a - b).cwiseAbs().maxCoeff(); };
  for (std::size_t i = 0; i < views; ++i) {
    const auto src = cca::empirical_moments(sources[i]);
    const auto enc = cca::empirical_moments(encoded[i]);
    report.view_moment_deviation.push_back(
        std::max(max_abs(src.cov_ii, enc.cov_ii), max_abs(src.mean_i, enc.mean_i)));
  }
  for (std::size_t i = 0; i < views; ++i)
    for (std::size_t j = i + 1; j < views; ++j) {
      const auto src = cca::empirical_moments(sources[i], sources[j]);
      const auto enc = cca::empirical_moments(encoded[i], encoded[j]);
      const auto r_src = cca::empirical_normalized_crosscov(sources[i], sources[j]);
      const auto r_enc = cca::empirical_normalized_crosscov(encoded[i], encoded[j]);
      report.pair_moment_deviation.push_back(
          std::max(max_abs(*src.cov_ij, *enc.cov_ij), max_abs(r_src.r_hat, r_enc.r_hat)));
    }
  for (double d : report.view_moment_deviation) report.max_moment_deviation = std::max(report.max_moment_deviation, d);
  for (double d : report.pair_moment_deviation) report.max_moment_deviation = std::max(report.max_moment_deviation, d);

  for (std::size_t i = 0; i < views && !report.failing_view; ++i)
    if (!(report.view_moment_deviation[i] <= tolerance)) report.failing_view = i;
  std::size_t slot = 0;
  for (std::size_t i = 0; i < views && !report.failing_view; ++i)
    for (std::size_t j = i + 1; j < views; ++j, ++slot)
      if (!(report.pair_moment_deviation[slot] <= tolerance)) {
        report.failing_view = i;
        break;
      }
  report.passed = !report.failing_view.has_value();
  return report;
}

}  // namespace mvcca::views
