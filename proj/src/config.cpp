#include "mvcca/config.hpp"

#include <fstream>
#include <set>

#include "mvcca/errors.hpp"
#include "mvcca/record.hpp"

namespace mvcca::harness {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Rate: return "rate";
    case ExperimentKind::Dominance: return "dominance";
    case ExperimentKind::Intersection: return "intersection";
    case ExperimentKind::HermiteCert: return "hermite-cert";
    case ExperimentKind::Invariance: return "invariance";
    case ExperimentKind::Estimate: return "estimate";
    case ExperimentKind::ConstructSpectrum: return "construct-spectrum";
  }
  return "rate";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::Rate, ExperimentKind::Dominance, ExperimentKind::Intersection,
                 ExperimentKind::HermiteCert, ExperimentKind::Invariance, ExperimentKind::Estimate,
                 ExperimentKind::ConstructSpectrum})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown experiment kind '" + name + "'");
}

std::vector<double> default_ratio_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back((24.0 + k) / 40.0);
  return grid;
}

std::vector<Eigen::MatrixXd> planted_partial_overlap(double amplitude) {
  if (!(amplitude > 0.0)) throw ConfigError("planted amplitude must be positive");
  Eigen::MatrixXd a1 = amplitude * Eigen::MatrixXd::Identity(3, 3);
  Eigen::MatrixXd a2 = Eigen::MatrixXd::Zero(3, 3);
  a2(0, 0) = a2(1, 1) = amplitude;
  Eigen::MatrixXd a3 = Eigen::MatrixXd::Zero(3, 3);
  a3(0, 0) = a3(2, 2) = amplitude;
  return {a1, a2, a3};
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::Rate:
      c.spectra = TargetSpectra::uniform({0.8, 0.8, 0.8}, 5);
      c.n_grid = {1000, 3000, 10000, 30000, 100000};
      c.trials = 50;
      break;
    case ExperimentKind::Intersection:
      c.spectra = TargetSpectra::uniform({0.8, 0.8, 0.8}, 5);
      c.n = 100000;
      c.trials = 100;
      break;
    case ExperimentKind::Dominance:
      c.ratios = default_ratio_grid();
      c.n = 10000;
      c.trials = 10;
      break;
    case ExperimentKind::HermiteCert:
      for (int k = 1; k <= 9; ++k) c.t_grid.push_back(k / 10.0);
      break;
    case ExperimentKind::Invariance:
      c.spectra = TargetSpectra::uniform({0.8, 0.8, 0.8}, 5);
      c.n = 10000;
      c.trials = 20;
      break;
    case ExperimentKind::Estimate:
      break;
    case ExperimentKind::ConstructSpectrum:
      c.spectra = TargetSpectra::uniform({0.8, 0.8, 0.8}, 5);
      break;
  }
  return c;
}

namespace {

std::vector<Eigen::MatrixXd> mixings_from_json(const json& j) {
  std::vector<Eigen::MatrixXd> out;
  for (const auto& m : j) {
    const auto rows = m.get<std::vector<std::vector<double>>>();
    if (rows.empty() || rows.front().empty()) throw ConfigError("mixings: empty matrix");
    Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows.front().size()) throw ConfigError("mixings: ragged matrix");
      for (std::size_t c = 0; c < rows[r].size(); ++c)
        a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    out.push_back(std::move(a));
  }
  return out;
}

json mixings_to_json(const std::vector<Eigen::MatrixXd>& mixings) {
  json out = json::array();
  for (const auto& a : mixings) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
      rows.push_back(std::move(row));
    }
    out.push_back(std::move(rows));
  }
  return out;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "experiment", "seed",   "spectra",        "mixings",     "planted",    "planted_amplitude", "prior",
      "n_grid",     "n",      "trials",         "tau",         "ratios",     "t1",                "rank",
      "view_dim",   "degree", "nodes",          "t_grid",      "mode_degree", "random_vectors",   "maps",
      "corrupt_view", "datasets", "pair_ranks", "view_ranks",  "tolerances", "output"};
  return keys;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (!known_keys().count(it.key())) throw ConfigError("unknown config key '" + it.key() + "'");
  try {
    ExperimentConfig c = defaults(experiment_kind_from_string(doc.at("experiment").get<std::string>()));
    c.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("spectra")) c.spectra = spectra_from_json(doc.at("spectra"));
    if (doc.contains("mixings")) {
      c.mixings = mixings_from_json(doc.at("mixings"));
      c.spectra.reset();
    }
    c.planted = doc.value("planted", std::string());
    if (!c.planted.empty()) {
      if (c.planted != "partial_overlap") throw ConfigError("planted must be \"partial_overlap\"");
      c.spectra.reset();
      c.mixings.clear();
    }
    c.planted_amplitude = doc.value("planted_amplitude", c.planted_amplitude);
    if (doc.contains("prior")) c.prior = prior_from_json(doc.at("prior"));
    if (doc.contains("n_grid")) c.n_grid = doc.at("n_grid").get<std::vector<Eigen::Index>>();
    c.n = doc.value("n", c.n);
    c.trials = doc.value("trials", c.trials);
    c.tau = doc.value("tau", c.tau);
    if (doc.contains("ratios")) c.ratios = doc.at("ratios").get<std::vector<double>>();
    c.t1 = doc.value("t1", c.t1);
    c.ablation_rank = doc.value("rank", c.ablation_rank);
    c.ablation_dim = doc.value("view_dim", c.ablation_dim);
    c.hermite_degree = doc.value("degree", c.hermite_degree);
    c.nodes = doc.value("nodes", c.nodes);
    if (doc.contains("t_grid")) c.t_grid = doc.at("t_grid").get<std::vector<double>>();
    c.mode_degree = doc.value("mode_degree", c.mode_degree);
    c.random_vectors = doc.value("random_vectors", c.random_vectors);
    if (doc.contains("maps"))
      for (const auto& m : doc.at("maps")) c.maps.push_back(views::map_config_from_json(m));
    c.corrupt_view = doc.value("corrupt_view", c.corrupt_view);
    if (doc.contains("datasets"))
      for (const auto& p : doc.at("datasets")) {
        std::filesystem::path path = p.get<std::string>();
        c.datasets.push_back(path.is_relative() && !base_dir.empty() ? base_dir / path : path);
      }
    if (doc.contains("pair_ranks"))
      c.pair_ranks = doc.at("pair_ranks").get<std::vector<std::vector<Eigen::Index>>>();
    if (doc.contains("view_ranks")) c.view_ranks = doc.at("view_ranks").get<std::vector<Eigen::Index>>();
    if (doc.contains("tolerances")) c.tolerances = doc.at("tolerances").get<std::map<std::string, double>>();

    if (c.trials < 0 || c.n < 0) throw ConfigError("trials and n must be nonnegative");
    for (std::size_t k = 1; k < c.n_grid.size(); ++k)
      if (c.n_grid[k] <= c.n_grid[k - 1]) throw ConfigError("n_grid must be strictly increasing");
    for (const auto& p : c.datasets)
      if (!std::filesystem::exists(p)) throw ConfigError("dataset file '" + p.string() + "' does not exist");
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

json ExperimentConfig::to_json() const {
  json j{{"experiment", harness::to_string(kind)}, {"seed", seed}};
  auto put_ensemble = [&] {
    if (spectra) j["spectra"] = mvcca::to_json(*spectra);
    if (!mixings.empty()) j["mixings"] = mixings_to_json(mixings);
    if (!planted.empty()) {
      j["planted"] = planted;
      j["planted_amplitude"] = planted_amplitude;
    }
    j["prior"] = mvcca::to_json(prior);
  };
  switch (kind) {
    case ExperimentKind::Rate:
      put_ensemble();
      j["n_grid"] = n_grid;
      j["trials"] = trials;
      break;
    case ExperimentKind::Intersection:
      put_ensemble();
      j["n"] = n;
      j["trials"] = trials;
      j["tau"] = tau;
      break;
    case ExperimentKind::Dominance:
      j["prior"] = mvcca::to_json(prior);
      j["ratios"] = ratios;
      j["t1"] = t1;
      j["rank"] = ablation_rank;
      j["view_dim"] = ablation_dim;
      j["mode_degree"] = mode_degree;
      j["n"] = n;
      j["trials"] = trials;
      break;
    case ExperimentKind::HermiteCert:
      j["degree"] = hermite_degree;
      j["nodes"] = nodes;
      j["t_grid"] = t_grid;
      j["mode_degree"] = mode_degree;
      j["random_vectors"] = random_vectors;
      break;
    case ExperimentKind::Invariance: {
      put_ensemble();
      j["n"] = n;
      j["trials"] = trials;
      json maps_json = json::array();
      for (const auto& m : maps) maps_json.push_back(views::to_json(m));
      j["maps"] = maps_json;
      j["corrupt_view"] = corrupt_view;
      break;
    }
    case ExperimentKind::Estimate: {
      json files = json::array();
      for (const auto& p : datasets) files.push_back(p.generic_string());
      j["datasets"] = files;
      if (pair_ranks) j["pair_ranks"] = *pair_ranks;
      if (view_ranks) j["view_ranks"] = *view_ranks;
      j["tau"] = tau;
      break;
    }
    case ExperimentKind::ConstructSpectrum:
      put_ensemble();
      break;
  }
  if (!tolerances.empty()) j["tolerances"] = tolerances;
  return j;
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(to_json_string(to_json())); }

double ExperimentConfig::tolerance(const std::string& key, double fallback) const {
  const auto it = tolerances.find(key);
  return it == tolerances.end() ? fallback : it->second;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return ExperimentConfig::from_json(doc, path.parent_path());
}

MixingEnsemble make_ensemble(const ExperimentConfig& config) {
  try {
    if (!config.planted.empty()) return MixingEnsemble::from_mixings(planted_partial_overlap(config.planted_amplitude));
    if (!config.mixings.empty()) return MixingEnsemble::from_mixings(config.mixings);
    if (config.spectra)
      return build_mixing(solve_per_view_gains(*config.spectra), config.spectra->view_dims,
                          SeededStream{config.seed, streams::kEnsemble});
  } catch (const InfeasibleSpectrumError&) {
    throw;
  } catch (const NumericError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("ensemble: ") + e.what());
  }
  throw ConfigError("config describes no ensemble (need spectra, mixings or planted)");
}

}  // namespace mvcca::harness
