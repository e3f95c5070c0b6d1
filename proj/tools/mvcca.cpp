// Command-line front end for the experiment harness.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvcca/config.hpp"
#include "mvcca/errors.hpp"
#include "mvcca/experiments.hpp"
#include "mvcca/record.hpp"

namespace {

using namespace mvcca;
using namespace mvcca::harness;
using nlohmann::json;

enum Exit { kOk = 0, kUsage = 2, kNumeric = 3, kAssert = 4 };

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  int threads = 0;
  std::string format = "csv";
  bool assert_pass = false;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
}

ExperimentConfig resolve_config(ExperimentKind kind, const Options& opt) {
  ExperimentConfig config = ExperimentConfig::defaults(kind);
  if (!opt.config_path.empty()) {
    json doc = read_json_file(opt.config_path);
    const std::filesystem::path base = std::filesystem::path(opt.config_path).parent_path();
    if (kind == ExperimentKind::ConstructSpectrum && doc.is_object() && doc.contains("t12")) {
      // A bare spectra document.
      json wrapped{{"experiment", to_string(kind)}, {"spectra", doc}};
      config = ExperimentConfig::from_json(wrapped, base);
    } else {
      if (doc.is_object() && !doc.contains("experiment")) doc["experiment"] = to_string(kind);
      config = ExperimentConfig::from_json(doc, base);
      if (config.kind != kind)
        throw ConfigError("config is for '" + to_string(config.kind) + "', not '" + to_string(kind) + "'");
    }
  }
  if (opt.seed) config.seed = *opt.seed;
  return config;
}

int run(ExperimentKind kind, const Options& opt) {
  if (opt.threads > 0) omp_set_num_threads(opt.threads);
  const Format format = format_from_string(opt.format);
  const ExperimentConfig config = resolve_config(kind, opt);
  const RunRecord record = run_experiment(config);
  std::filesystem::create_directories(opt.out_dir);
  for (const auto& path : emit(record, format, opt.out_dir)) std::cout << path.string() << '\n';
  std::cout << record.experiment << " config_hash=" << record.config_hash
            << " passed=" << (record.passed() ? "true" : "false") << '\n';
  std::fprintf(stderr, "wall time: %.3f s\n", record.wall_seconds);
  if (opt.assert_pass && !record.passed()) {
    std::cerr << "assertion failed: " << record.experiment << " did not pass its checks\n";
    return kAssert;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view CCA experiment harness"};
  app.require_subcommand(1);
  Options opt;
  app.set_version_flag("--version", std::string(library_version()));

  const std::pair<const char*, const char*> commands[] = {
      {"rate", "finite-sample rate sweep"},
      {"dominance", "dominance-ratio ablation"},
      {"intersection", "intersection filter with bound checks"},
      {"hermite-cert", "Hermite quadrature certification"},
      {"invariance", "observation-level wiring check"},
      {"estimate", "intersection filter on dataset files"},
      {"construct-spectrum", "build an ensemble from target spectra"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "override the config seed");
    sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    sub->add_option("--threads", opt.threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
    sub->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    sub->add_flag("--assert", opt.assert_pass, "exit 4 when the run's own checks fail");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    const auto* sub = app.get_subcommands().front();
    return run(experiment_kind_from_string(sub->get_name()), opt);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const QuadratureError& e) {
    std::cerr << "quadrature error: " << e.what() << '\n';
    return kNumeric;
  } catch (const InsufficientSamplesError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    // Config, parameter, dimension, infeasible-spectrum and I/O errors.
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
