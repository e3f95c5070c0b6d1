// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include "mvcca/config.hpp"
#include "mvcca/ensemble.hpp"
#include "mvcca/experiments.hpp"
#include "mvcca/intersection.hpp"
#include "mvcca/record.hpp"

using namespace mvcca;
using namespace mvcca::harness;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = false;
  std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Every experiment run by the gate, keyed for the determinism re-run.
std::vector<ExperimentConfig> g_runs;

RunRecord run_logged(const ExperimentConfig& c) {
  g_runs.push_back(c);
  return run_experiment(c);
}

TargetSpectra random_feasible_spectra(std::mt19937_64& eng) {
  std::uniform_int_distribution<int> pick_r(1, 5);
  std::uniform_real_distribution<double> gain(0.05, 0.95);
  TargetSpectra s;
  s.r = pick_r(eng);
  std::uniform_int_distribution<int> pick_d(static_cast<int>(s.r), 8);
  std::array<std::vector<double>, 3> g;
  for (auto& gi : g) {
    for (Index k = 0; k < s.r; ++k) gi.push_back(gain(eng));
    std::sort(gi.begin(), gi.end(), std::greater<>());
  }
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j)
      for (Index k = 0; k < s.r; ++k) s.t[pair_slot(i, j)].push_back(g[i][static_cast<std::size_t>(k)] * g[j][static_cast<std::size_t>(k)]);
  for (auto& d : s.view_dims) d = pick_d(eng);
  return s;
}

Outcome spectrum_fidelity() {
  const auto start = Clock::now();
  std::mt19937_64 eng(20240601);
  double worst = 0.0;
  bool all = true;
  for (int k = 0; k < 100; ++k) {
    auto c = ExperimentConfig::defaults(ExperimentKind::ConstructSpectrum);
    c.seed = static_cast<std::uint64_t>(k);
    c.spectra = random_feasible_spectra(eng);
    const auto r = run_logged(c);
    worst = std::max(worst, r.summary["max_abs_err"].get<double>());
    all = all && r.passed();
  }
  const double secs = seconds_since(start);
  return {all && worst <= 1e-10 && secs < 5.0,
          "100 spectra, max |sv - target| = " + fmt("%.3g", worst) + ", " + fmt("%.2f", secs) + " s"};
}

RunRecord g_hermite;

Outcome mehler_certification() {
  const auto start = Clock::now();
  auto c = ExperimentConfig::defaults(ExperimentKind::HermiteCert);
  c.hermite_degree = 6;
  c.nodes = 64;
  c.mode_degree = 4;
  c.random_vectors = 500;
  c.t_grid.clear();
  for (int k = 1; k <= 9; ++k) c.t_grid.push_back(0.1 * k);
  g_hermite = run_logged(c);
  const double secs = seconds_since(start);
  const double ortho = g_hermite.summary["orthonormality_max_dev"].get<double>();
  const double cross = g_hermite.summary["cross_moment_max_dev"].get<double>();
  const auto warnings = g_hermite.summary["precision_warnings"].get<std::int64_t>();
  return {ortho < 1e-8 && cross < 1e-8 && warnings == 0 && secs < 10.0,
          "orthonormality " + fmt("%.3g", ortho) + ", cross-moment " + fmt("%.3g", cross) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome dominance_equivalence() {
  const auto& t = g_hermite.tables.at("agreement");
  std::size_t random_rows = 0, grid_rows = 0, disagreements = 0;
  for (const auto& row : t.rows) {
    const auto& source = std::get<std::string>(row[t.column("source")]);
    (source == "random" ? random_rows : grid_rows)++;
    if (!std::get<bool>(row[t.column("agree")])) ++disagreements;
  }
  const bool flip = g_hermite.summary["flip_at_one"].get<bool>();
  return {random_rows == 500 && grid_rows == 21 && disagreements == 0 && flip,
          std::to_string(random_rows) + " random + " + std::to_string(grid_rows) + " grid vectors, " +
              std::to_string(disagreements) + " disagreements, flip at 1: " + (flip ? "exact" : "no")};
}

Outcome finite_sample_rate() {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto start = Clock::now();
  const auto r = run_logged(ExperimentConfig::defaults(ExperimentKind::Rate));
  const double secs = seconds_since(start);
  omp_set_num_threads(saved);
  const double sp = r.summary["slope_pairwise"].get<double>();
  const double sm = r.summary["slope_multiview"].get<double>();
  const bool in = sp >= -0.65 && sp <= -0.35 && sm >= -0.65 && sm <= -0.35;
  return {in && secs < 300.0,
          "slopes pairwise " + fmt("%.4f", sp) + ", multi-view " + fmt("%.4f", sm) + ", " + fmt("%.1f", secs) +
              " s single-threaded"};
}

Outcome bound_chain() {
  const auto r = run_logged(ExperimentConfig::defaults(ExperimentKind::Intersection));
  const double frac = r.summary["fraction_all_bounds"].get<double>();
  const bool delta_ok = r.summary["delta_bounds_ok"].get<bool>();
  const auto trials = r.tables.at("trials").rows.size();
  return {frac >= 0.95 && delta_ok && trials == 100,
          std::to_string(trials) + " trials, chain held in " + fmt("%.2f", 100.0 * frac) +
              "%, population gap bound " + (delta_ok ? "ok" : "violated")};
}

Outcome intersection_exactness() {
  const auto e = MixingEnsemble::from_mixings(planted_partial_overlap(2.0));
  const auto pop = intersection::population_recover(e);
  const auto& v = pop.views[0];
  const double ev_err = std::max({std::abs(v.eigenvalues(0) - 1.0), std::abs(v.eigenvalues(1) - 0.5),
                                  std::abs(v.eigenvalues(2) - 0.5)});
  const linalg::SubspaceBasis common(Eigen::MatrixXd::Identity(3, 1));
  const double sin = linalg::sin_theta_norm(v.basis, common);
  return {ev_err <= 1e-10 && sin <= 1e-10 && v.rank == 1,
          "eigenvalue error " + fmt("%.3g", ev_err) + ", sin-theta to span{e1} " + fmt("%.3g", sin)};
}

Outcome reparameterization_wiring() {
  const auto r = run_logged(ExperimentConfig::defaults(ExperimentKind::Invariance));
  const double dev = r.summary["max_moment_dev"].get<double>();
  const double rt = r.summary["max_roundtrip_err"].get<double>();
  const auto trials = r.tables.at("trials").rows.size();
  return {r.summary["all_passed"].get<bool>() && trials == 20 && dev <= 1e-10 && rt < 1e-8,
          std::to_string(trials) + " random specs, moment deviation " + fmt("%.3g", dev) + ", round trip " +
              fmt("%.3g", rt)};
}

std::vector<std::string> emitted_bytes(const RunRecord& r, Format f, const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& p : emit(r, f, dir)) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out.push_back(p.filename().string() + "\n" + ss.str());
  }
  return out;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "mvcca_acceptance";
  fs::remove_all(root);
  std::size_t files = 0, mismatches = 0;
  const auto runs = g_runs;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    // The two runs use different thread counts on purpose.
    omp_set_num_threads(1);
    const auto a = run_experiment(runs[k]);
    omp_set_num_threads(std::max(2, omp_get_num_procs()));
    const auto b = run_experiment(runs[k]);
    for (Format f : {Format::Csv, Format::Json}) {
      const auto ba = emitted_bytes(a, f, root / ("a" + std::to_string(k)));
      const auto bb = emitted_bytes(b, f, root / ("b" + std::to_string(k)));
      files += ba.size();
      if (ba != bb) ++mismatches;
    }
  }
  fs::remove_all(root);
  return {mismatches == 0 && files > 0,
          std::to_string(runs.size()) + " runs re-executed, " + std::to_string(files) + " files compared, " +
              std::to_string(mismatches) + " mismatches"};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"spectrum fidelity", spectrum_fidelity},
      {"Mehler certification", mehler_certification},
      {"dominance equivalence", dominance_equivalence},
      {"finite-sample rate", finite_sample_rate},
      {"perturbation-bound chain", bound_chain},
      {"intersection exactness", intersection_exactness},
      {"reparameterization wiring", reparameterization_wiring},
      {"determinism", determinism},
  };
  int failures = 0, index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %d %s: %s\n", o.passed ? "PASS" : "FAIL", index, name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.passed ? 0 : 1;
  }
  std::printf("%d/%d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}
