#include "mvcca/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <random>
#include <string>

#include "mvcca/cca.hpp"
#include "mvcca/dataset.hpp"
#include "mvcca/errors.hpp"
#include "mvcca/hermite.hpp"
#include "mvcca/intersection.hpp"
#include "mvcca/sampling.hpp"
#include "mvcca/views.hpp"

#ifndef MVCCA_VERSION
#define MVCCA_VERSION "unknown"
#endif

namespace mvcca::harness {

using nlohmann::json;
using intersection::MultiviewRecovery;
using intersection::PairRanks;

const char* library_version() { return MVCCA_VERSION; }

double median(std::vector<double> values) {
  if (values.empty()) throw DimensionError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

SlopeFit fit_log_slope(const std::vector<double>& n, const std::vector<double>& err) {
  if (n.size() != err.size() || n.size() < 2) throw DimensionError("fit_log_slope: need >= 2 matching points");
  const auto k = static_cast<double>(n.size());
  std::vector<double> x, y;
  for (std::size_t i = 0; i < n.size(); ++i) {
    x.push_back(std::log10(n[i]));
    y.push_back(std::log10(err[i]));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n.size() > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      ssr += r * r;
    }
    fit.slope_se = std::sqrt(ssr / (k - 2.0) / sxx);
  }
  return fit;
}

namespace {

using Clock = std::chrono::steady_clock;

RunRecord start_record(const ExperimentConfig& config) {
  RunRecord r;
  r.experiment = to_string(config.kind);
  r.config = config.to_json();
  r.config_hash = config.hash();
  r.version = library_version();
  return r;
}

std::string pair_label(std::size_t i, std::size_t j) { return std::to_string(i + 1) + std::to_string(j + 1); }
std::string cond_label(std::size_t i, std::size_t j) { return std::to_string(i + 1) + "|" + std::to_string(j + 1); }

std::vector<std::pair<std::size_t, std::size_t>> unordered_pairs(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out.emplace_back(i, j);
  return out;
}

// Ordered pairs (i|j), (j|i) for each unordered pair in lexicographic order.
std::vector<std::pair<std::size_t, std::size_t>> ordered_pairs(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& [i, j] : unordered_pairs(n)) {
    out.emplace_back(i, j);
    out.emplace_back(j, i);
  }
  return out;
}

// Runs fn(k) for k in [0, count) across the OpenMP pool. The first failing
// index (lowest k) is rethrown after the loop, wrapped by `describe`.
void parallel_trials(std::size_t count, const std::function<void(std::size_t)>& fn,
                     const std::function<std::string(std::size_t)>& describe) {
  std::vector<std::exception_ptr> failures(count);
  const auto total = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < total; ++k) {
    try {
      fn(static_cast<std::size_t>(k));
    } catch (...) {
      failures[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (std::size_t k = 0; k < count; ++k) {
    if (!failures[k]) continue;
    try {
      std::rethrow_exception(failures[k]);
    } catch (const NearSingularError& e) {
      throw NearSingularError(describe(k) + ": " + e.what());
    } catch (const InversionError& e) {
      throw InversionError(describe(k) + ": " + e.what());
    } catch (const NumericError& e) {
      throw NumericError(describe(k) + ": " + e.what());
    } catch (const InsufficientSamplesError& e) {
      throw InsufficientSamplesError(describe(k) + ": " + e.what());
    } catch (const QuadratureError& e) {
      throw QuadratureError(describe(k) + ": " + e.what());
    }
    // Anything else keeps its original type and message.
  }
}

struct Truth {
  MultiviewRecovery population;
  PairRanks pair_ranks{0};
  std::vector<Index> view_ranks;
};

Truth make_truth(const MixingEnsemble& ensemble) {
  Truth t;
  t.population = intersection::population_recover(ensemble);
  t.pair_ranks = intersection::ranks_of(t.population);
  for (const auto& v : t.population.views) t.view_ranks.push_back(v.rank);
  return t;
}

struct TrialMetrics {
  std::vector<double> cond_sin;      // ordered_pairs order
  std::vector<double> cond_pa_max;   // ordered_pairs order
  std::vector<double> r_err;         // unordered_pairs order
  std::vector<double> gap_hat;       // unordered_pairs order
  std::vector<double> view_sin, view_gap_hat, view_s_err, view_pa_mean, view_pa_max;
  std::vector<Index> selected_rank;
  std::vector<bool> low_confidence;
  double pairwise_max = 0.0;
  double multiview_max = 0.0;
};

TrialMetrics evaluate_trial(const Truth& truth, const std::vector<ViewDataset>& data, double tau) {
  const std::size_t n_views = data.size();
  const MultiviewRecovery est = intersection::multiview_recover(data, truth.pair_ranks, truth.view_ranks, tau);
  TrialMetrics m;
  for (const auto& [i, j] : ordered_pairs(n_views)) {
    const auto& hat = est.conditional(i, j);
    const auto& ref = truth.population.conditional(i, j);
    m.cond_sin.push_back(linalg::sin_theta_norm(hat, ref));
    m.cond_pa_max.push_back(linalg::principal_angles(hat, ref).max_degrees);
    m.pairwise_max = std::max(m.pairwise_max, m.cond_sin.back());
  }
  for (const auto& [i, j] : unordered_pairs(n_views)) {
    const auto& hat = est.pair(i, j);
    m.r_err.push_back(linalg::spectral_norm(hat.r - truth.population.pair(i, j).r));
    m.gap_hat.push_back(hat.gap);
  }
  for (std::size_t i = 0; i < n_views; ++i) {
    const auto& hat = est.views[i];
    const auto& ref = truth.population.views[i];
    m.view_sin.push_back(linalg::sin_theta_norm(hat.basis, ref.basis));
    const auto pa = linalg::principal_angles(hat.basis, ref.basis);
    m.view_pa_mean.push_back(pa.mean_degrees);
    m.view_pa_max.push_back(pa.max_degrees);
    m.view_gap_hat.push_back(hat.gap);
    m.view_s_err.push_back(linalg::spectral_norm(hat.s - ref.s));
    m.selected_rank.push_back(intersection::select_rank(hat.s, tau));
    m.low_confidence.push_back(hat.low_confidence);
    m.multiview_max = std::max(m.multiview_max, m.view_sin.back());
  }
  return m;
}

void append(std::vector<std::string>& cols, const std::string& prefix, const std::vector<std::string>& labels) {
  for (const auto& l : labels) cols.push_back(prefix + l);
}

std::vector<std::string> cond_labels(std::size_t n) {
  std::vector<std::string> out;
  for (const auto& [i, j] : ordered_pairs(n)) out.push_back(cond_label(i, j));
  return out;
}

std::vector<std::string> pair_labels(std::size_t n) {
  std::vector<std::string> out;
  for (const auto& [i, j] : unordered_pairs(n)) out.push_back(pair_label(i, j));
  return out;
}

std::vector<std::string> view_labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i + 1));
  return out;
}

template <class T>
void push_all(std::vector<Cell>& row, const std::vector<T>& values) {
  for (const auto& v : values) {
    if constexpr (std::is_same_v<T, Index>)
      row.emplace_back(static_cast<std::int64_t>(v));
    else if constexpr (std::is_same_v<T, bool>)
      row.emplace_back(static_cast<bool>(v));
    else
      row.emplace_back(static_cast<double>(v));
  }
}

void finish(RunRecord& record, Clock::time_point start, bool passed) {
  record.summary["passed"] = passed;
  record.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

RunRecord run_rate_experiment(const ExperimentConfig& config) {
  const auto start = Clock::now();
  if (config.n_grid.size() < 4) throw ConfigError("rate: n grid needs at least 4 points");
  if (config.n_grid.front() < 2 ||
      std::log10(static_cast<double>(config.n_grid.back()) / static_cast<double>(config.n_grid.front())) < 1.5)
    throw ConfigError("rate: n grid must span at least 1.5 decades");
  if (config.trials < 20) throw ConfigError("rate: at least 20 trials are required");

  RunRecord record = start_record(config);
  const MixingEnsemble ensemble = make_ensemble(config);
  const Truth truth = make_truth(ensemble);
  const std::size_t n_views = ensemble.num_views();
  const auto trials = static_cast<std::size_t>(config.trials);
  const std::size_t total = config.n_grid.size() * trials;

  std::vector<TrialMetrics> metrics(total);
  parallel_trials(
      total,
      [&](std::size_t k) {
        const Index n = config.n_grid[k / trials];
        const auto data = sample_sources(ensemble, config.prior, n, trial_stream(config.seed, k));
        metrics[k] = evaluate_trial(truth, data, config.tau);
      },
      [&](std::size_t k) {
        return "rate trial (n=" + std::to_string(config.n_grid[k / trials]) + ", trial=" + std::to_string(k % trials) + ")";
      });

  Table per_trial;
  per_trial.columns = {"n", "trial"};
  append(per_trial.columns, "sin_", cond_labels(n_views));
  append(per_trial.columns, "rhat_err_", pair_labels(n_views));
  append(per_trial.columns, "delta_hat_", pair_labels(n_views));
  append(per_trial.columns, "sin_mv_", view_labels(n_views));
  append(per_trial.columns, "gamma_hat_", view_labels(n_views));
  append(per_trial.columns, "pa_mean_mv_", view_labels(n_views));
  append(per_trial.columns, "pa_max_mv_", view_labels(n_views));
  per_trial.columns.insert(per_trial.columns.end(), {"pairwise_max", "multiview_max"});

  Table by_n;
  by_n.columns = {"n", "trials", "median_pairwise", "median_multiview"};
  std::vector<double> ns, med_pair, med_mv;
  for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
    std::vector<double> pw, mv;
    for (std::size_t t = 0; t < trials; ++t) {
      const auto& m = metrics[g * trials + t];
      std::vector<Cell> row{static_cast<std::int64_t>(config.n_grid[g]), static_cast<std::int64_t>(t)};
      push_all(row, m.cond_sin);
      push_all(row, m.r_err);
      push_all(row, m.gap_hat);
      push_all(row, m.view_sin);
      push_all(row, m.view_gap_hat);
      push_all(row, m.view_pa_mean);
      push_all(row, m.view_pa_max);
      row.emplace_back(m.pairwise_max);
      row.emplace_back(m.multiview_max);
      per_trial.add_row(std::move(row));
      pw.push_back(m.pairwise_max);
      mv.push_back(m.multiview_max);
    }
    ns.push_back(static_cast<double>(config.n_grid[g]));
    med_pair.push_back(median(pw));
    med_mv.push_back(median(mv));
    by_n.add_row({static_cast<std::int64_t>(config.n_grid[g]), static_cast<std::int64_t>(trials), med_pair.back(),
                  med_mv.back()});
  }
  const SlopeFit pair_fit = fit_log_slope(ns, med_pair);
  const SlopeFit mv_fit = fit_log_slope(ns, med_mv);
  const double lo = config.tolerance("slope_low", -0.65);
  const double hi = config.tolerance("slope_high", -0.35);
  const bool pair_ok = pair_fit.slope >= lo && pair_fit.slope <= hi;
  const bool mv_ok = mv_fit.slope >= lo && mv_fit.slope <= hi;

  record.tables["trials"] = std::move(per_trial);
  record.tables["by_n"] = std::move(by_n);
  record.summary = {{"slope_pairwise", pair_fit.slope},
                    {"slope_pairwise_se", pair_fit.slope_se},
                    {"intercept_pairwise", pair_fit.intercept},
                    {"slope_multiview", mv_fit.slope},
                    {"slope_multiview_se", mv_fit.slope_se},
                    {"intercept_multiview", mv_fit.intercept},
                    {"slope_window", {lo, hi}},
                    {"pairwise_in_window", pair_ok},
                    {"multiview_in_window", mv_ok}};
  finish(record, start, pair_ok && mv_ok);
  return record;
}

RunRecord run_intersection_experiment(const ExperimentConfig& config) {
  const auto start = Clock::now();
  if (config.trials < 1) throw ConfigError("intersection: trials must be >= 1");
  if (config.n < 2) throw ConfigError("intersection: n must be >= 2");
  RunRecord record = start_record(config);
  const MixingEnsemble ensemble = make_ensemble(config);
  if (ensemble.num_views() < 3) throw ConfigError("intersection: needs at least 3 views");
  const Truth truth = make_truth(ensemble);
  const std::size_t n_views = ensemble.num_views();
  const auto trials = static_cast<std::size_t>(config.trials);
  const auto pairs = unordered_pairs(n_views);

  // Population checks: Δ_ij ≥ t_r − t_1² whenever dominance holds.
  Table population;
  population.columns = {"pair", "rank", "t_1", "t_r", "delta", "dominance_gap", "dominance_holds", "delta_bound_ok"};
  bool bounds_ok = true;
  std::vector<double> delta(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& est = truth.population.pairs[p];
    delta[p] = est.gap;
    const std::vector<double> t(est.singular_values.data(), est.singular_values.data() + est.rank);
    const auto dom = hermite::dominance_check(t);
    const bool ok = !dom.holds || est.gap >= dom.gap;
    bounds_ok = bounds_ok && ok;
    population.add_row({pair_label(pairs[p].first, pairs[p].second), static_cast<std::int64_t>(est.rank), t.front(),
                        t.back(), est.gap, dom.gap, dom.holds, ok});
  }
  std::vector<double> gamma;
  for (const auto& v : truth.population.views) gamma.push_back(v.gap);

  std::vector<TrialMetrics> metrics(trials);
  parallel_trials(
      trials,
      [&](std::size_t k) {
        const auto data = sample_sources(ensemble, config.prior, config.n, trial_stream(config.seed, k));
        metrics[k] = evaluate_trial(truth, data, config.tau);
      },
      [](std::size_t k) { return "intersection trial " + std::to_string(k); });

  Table per_trial;
  per_trial.columns = {"trial"};
  append(per_trial.columns, "sin_", cond_labels(n_views));
  append(per_trial.columns, "rhat_err_", pair_labels(n_views));
  append(per_trial.columns, "wedin_ok_", pair_labels(n_views));
  append(per_trial.columns, "s_err_", view_labels(n_views));
  append(per_trial.columns, "gamma_hat_", view_labels(n_views));
  append(per_trial.columns, "sin_mv_", view_labels(n_views));
  append(per_trial.columns, "davis_kahan_ok_", view_labels(n_views));
  append(per_trial.columns, "chain_ok_", view_labels(n_views));
  append(per_trial.columns, "selected_rank_", view_labels(n_views));
  append(per_trial.columns, "low_confidence_", view_labels(n_views));
  per_trial.columns.insert(per_trial.columns.end(), {"all_bounds_ok", "ranks_ok"});

  std::size_t n_wedin = 0, n_chain = 0, n_all = 0, n_rank = 0, n_low = 0;
  const auto ordered = ordered_pairs(n_views);
  for (std::size_t k = 0; k < trials; ++k) {
    const auto& m = metrics[k];
    std::vector<bool> wedin(pairs.size()), dk(n_views), chain(n_views);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const double bound = 2.0 * m.r_err[p] / delta[p];
      wedin[p] = m.cond_sin[2 * p] <= bound && m.cond_sin[2 * p + 1] <= bound;
    }
    bool ranks_ok = true;
    for (std::size_t i = 0; i < n_views; ++i) {
      double worst_pair = 0.0;
      for (std::size_t q = 0; q < ordered.size(); ++q)
        if (ordered[q].first == i) worst_pair = std::max(worst_pair, m.cond_sin[q]);
      dk[i] = m.view_sin[i] <= m.view_s_err[i] / gamma[i];
      chain[i] = m.view_sin[i] <= 2.0 / gamma[i] * worst_pair;
      ranks_ok = ranks_ok && m.selected_rank[i] == truth.view_ranks[i];
      n_low += m.low_confidence[i] ? 1 : 0;
    }
    const bool all_wedin = std::all_of(wedin.begin(), wedin.end(), [](bool b) { return b; });
    const bool all_chain = std::all_of(chain.begin(), chain.end(), [](bool b) { return b; });
    n_wedin += all_wedin;
    n_chain += all_chain;
    n_all += all_wedin && all_chain;
    n_rank += ranks_ok;

    std::vector<Cell> row{static_cast<std::int64_t>(k)};
    push_all(row, m.cond_sin);
    push_all(row, m.r_err);
    push_all(row, wedin);
    push_all(row, m.view_s_err);
    push_all(row, m.view_gap_hat);
    push_all(row, m.view_sin);
    push_all(row, dk);
    push_all(row, chain);
    push_all(row, m.selected_rank);
    push_all(row, m.low_confidence);
    row.emplace_back(all_wedin && all_chain);
    row.emplace_back(ranks_ok);
    per_trial.add_row(std::move(row));
  }
  const double frac = static_cast<double>(n_all) / static_cast<double>(trials);
  const double frac_rank = static_cast<double>(n_rank) / static_cast<double>(trials);
  const double required = config.tolerance("chain_fraction", 0.95);

  record.tables["trials"] = std::move(per_trial);
  record.tables["population"] = std::move(population);
  json gamma_json = gamma;
  json view_ranks_json = json::array();
  for (auto r : truth.view_ranks) view_ranks_json.push_back(static_cast<std::int64_t>(r));
  record.summary = {{"fraction_wedin", static_cast<double>(n_wedin) / static_cast<double>(trials)},
                    {"fraction_chain", static_cast<double>(n_chain) / static_cast<double>(trials)},
                    {"fraction_all_bounds", frac},
                    {"fraction_rank_selected", frac_rank},
                    {"low_confidence_flags", static_cast<std::int64_t>(n_low)},
                    {"population_gamma", gamma_json},
                    {"population_view_ranks", view_ranks_json},
                    {"delta_bounds_ok", bounds_ok},
                    {"required_fraction", required}};
  finish(record, start, frac >= required && frac_rank >= required && bounds_ok);
  return record;
}

namespace {

// t_k spaced linearly from t1 down to ratio·t1²; empty when infeasible.
std::vector<double> ablation_spectrum(double t1, double ratio, Index rank) {
  const double tr = ratio * t1 * t1;
  if (rank < 2 || !(tr > 0.0) || tr > t1 || !(t1 < 1.0)) return {};
  std::vector<double> t(static_cast<std::size_t>(rank));
  for (Index k = 0; k < rank; ++k) t[static_cast<std::size_t>(k)] = t1 + (tr - t1) * static_cast<double>(k) / static_cast<double>(rank - 1);
  t.front() = t1;
  t.back() = tr;
  return t;
}

bool is_tie(double ratio) { return std::abs(ratio - 1.0) <= 1e-12; }

}  // namespace

RunRecord run_dominance_ablation(const ExperimentConfig& config) {
  const auto start = Clock::now();
  if (config.ratios.empty()) throw ConfigError("dominance: ratio grid is empty");
  const bool below = std::any_of(config.ratios.begin(), config.ratios.end(), [](double r) { return r < 1.0; });
  const bool above = std::any_of(config.ratios.begin(), config.ratios.end(), [](double r) { return r > 1.0; });
  if (!below || !above) throw ConfigError("dominance: ratio grid must cross 1");
  if (config.ablation_rank < 2) throw ConfigError("dominance: rank must be >= 2");
  if (config.ablation_dim < config.ablation_rank) throw ConfigError("dominance: view_dim must be >= rank");
  if (config.mode_degree < 2) throw ConfigError("dominance: mode_degree must be >= 2");
  RunRecord record = start_record(config);

  Table table;
  table.columns = {"ratio", "feasible", "t_1",           "t_r",           "dominance_gap",    "dominance_holds",
                   "leading_modes_linear", "agree", "indeterminate", "delta_population", "pa_max_median", "pa_mean_median"};
  bool all_agree = true, flip_exact = true;
  for (std::size_t g = 0; g < config.ratios.size(); ++g) {
    const double ratio = config.ratios[g];
    const auto t = ablation_spectrum(config.t1, ratio, config.ablation_rank);
    if (t.empty()) {
      const double nan = std::nan("");
      table.add_row({ratio, false, config.t1, ratio * config.t1 * config.t1, nan, false, false, false, is_tie(ratio),
                     nan, nan, nan});
      continue;
    }
    const auto dom = hermite::dominance_check(t);
    const bool linear = hermite::leading_modes_are_linear(t, config.mode_degree);
    const bool agree = linear == dom.holds;
    all_agree = all_agree && agree;
    if (!is_tie(ratio)) flip_exact = flip_exact && (linear == (ratio > 1.0));

    double pa_max_med = std::nan(""), pa_mean_med = std::nan(""), delta_pop = std::nan("");
    if (config.trials > 0 && config.n > 1) {
      const auto spectra = TargetSpectra::uniform(t, config.ablation_dim);
      const auto ensemble = build_mixing(solve_per_view_gains(spectra), spectra.view_dims,
                                         SeededStream{config.seed, hash_combine(streams::kEnsemble, g)});
      const Truth truth = make_truth(ensemble);
      delta_pop = truth.population.pairs.front().gap;
      const auto trials = static_cast<std::size_t>(config.trials);
      std::vector<double> pa_max(trials), pa_mean(trials);
      parallel_trials(
          trials,
          [&](std::size_t k) {
            const auto data = sample_sources(ensemble, config.prior, config.n,
                                             trial_stream(config.seed, g * trials + k));
            const auto est = intersection::multiview_recover(data, truth.pair_ranks, truth.view_ranks, config.tau);
            double worst = 0.0, mean = 0.0;
            const auto ordered = ordered_pairs(data.size());
            for (const auto& [i, j] : ordered) {
              const auto pa = linalg::principal_angles(est.conditional(i, j), truth.population.conditional(i, j));
              worst = std::max(worst, pa.max_degrees);
              mean += pa.mean_degrees;
            }
            pa_max[k] = worst;
            pa_mean[k] = mean / static_cast<double>(ordered.size());
          },
          [&](std::size_t k) { return "dominance ratio " + format_double(ratio) + " trial " + std::to_string(k); });
      pa_max_med = median(pa_max);
      pa_mean_med = median(pa_mean);
    }
    table.add_row({ratio, true, t.front(), t.back(), dom.gap, dom.holds, linear, agree, is_tie(ratio), delta_pop,
                   pa_max_med, pa_mean_med});
  }
  record.tables["transition"] = std::move(table);
  record.summary = {{"all_agree", all_agree}, {"flip_at_one", flip_exact}};
  finish(record, start, all_agree && flip_exact);
  return record;
}

RunRecord run_hermite_cert(const ExperimentConfig& config) {
  const auto start = Clock::now();
  if (config.hermite_degree < 0 || config.nodes < 1) throw ConfigError("hermite-cert: invalid degree or nodes");
  if (config.t_grid.empty()) throw ConfigError("hermite-cert: t grid is empty");
  if (config.mode_degree < 2) throw ConfigError("hermite-cert: mode_degree must be >= 2");
  RunRecord record = start_record(config);
  const double tol = config.tolerance("quadrature", 1e-8);

  const double ortho = hermite::orthonormality_check(config.hermite_degree, config.nodes);

  struct Cross {
    int n, m;
    double t;
    hermite::CrossMoment cm;
  };
  std::vector<Cross> grid;
  for (double t : config.t_grid)
    for (int n = 0; n <= config.hermite_degree; ++n)
      for (int m = 0; m <= config.hermite_degree; ++m) grid.push_back({n, m, t, {}});
  parallel_trials(
      grid.size(), [&](std::size_t k) { grid[k].cm = hermite::mehler_cross_moment(grid[k].n, grid[k].m, grid[k].t, config.nodes); },
      [&](std::size_t k) { return "cross moment (" + std::to_string(grid[k].n) + "," + std::to_string(grid[k].m) + ")"; });

  Table cross;
  cross.columns = {"n", "m", "t", "value", "expected", "abs_dev", "precision_warning"};
  double worst = 0.0;
  std::int64_t warnings = 0;
  for (const auto& c : grid) {
    const double expected = c.n == c.m ? std::pow(c.t, c.n) : 0.0;
    const double dev = std::abs(c.cm.value - expected);
    if (c.cm.precision_warning)
      ++warnings;
    else
      worst = std::max(worst, dev);
    cross.add_row({static_cast<std::int64_t>(c.n), static_cast<std::int64_t>(c.m), c.t, c.cm.value, expected, dev,
                   c.cm.precision_warning});
  }

  Table agreement;
  agreement.columns = {"source", "t", "ratio", "dominance_gap", "dominance_holds", "leading_modes_linear", "agree",
                       "indeterminate"};
  bool all_agree = true, flip_exact = true;
  auto join = [](const std::vector<double>& t) {
    std::string s;
    for (std::size_t k = 0; k < t.size(); ++k) s += (k ? ";" : "") + format_double(t[k]);
    return s;
  };
  for (double ratio : default_ratio_grid()) {
    const std::vector<double> t{0.9, ratio * 0.9 * 0.9};
    const auto dom = hermite::dominance_check(t);
    const bool linear = hermite::leading_modes_are_linear(t, config.mode_degree);
    all_agree = all_agree && linear == dom.holds;
    if (!is_tie(ratio)) flip_exact = flip_exact && linear == (ratio > 1.0);
    agreement.add_row({std::string("grid"), join(t), ratio, dom.gap, dom.holds, linear, linear == dom.holds, is_tie(ratio)});
  }
  auto engine = SeededStream{config.seed, hash_combine(streams::kEnsemble, 0x61677265ULL)}.engine();
  std::uniform_int_distribution<int> pick_rank(1, 4);
  std::uniform_real_distribution<double> pick_t(0.05, 0.95);
  for (int k = 0; k < config.random_vectors; ++k) {
    std::vector<double> t(static_cast<std::size_t>(pick_rank(engine)));
    for (auto& v : t) v = pick_t(engine);
    std::sort(t.begin(), t.end(), std::greater<>());
    const auto dom = hermite::dominance_check(t);
    const bool linear = hermite::leading_modes_are_linear(t, config.mode_degree);
    all_agree = all_agree && linear == dom.holds;
    agreement.add_row({std::string("random"), join(t), t.back() / (t.front() * t.front()), dom.gap, dom.holds, linear,
                       linear == dom.holds, false});
  }

  record.tables["cross_moment"] = std::move(cross);
  record.tables["agreement"] = std::move(agreement);
  record.summary = {{"orthonormality_max_dev", ortho},
                    {"cross_moment_max_dev", worst},
                    {"precision_warnings", warnings},
                    {"all_agree", all_agree},
                    {"flip_at_one", flip_exact},
                    {"tolerance", tol}};
  finish(record, start, ortho < tol && worst < tol && all_agree && flip_exact);
  return record;
}

RunRecord run_invariance_experiment(const ExperimentConfig& config) {
  const auto start = Clock::now();
  if (config.trials < 1) throw ConfigError("invariance: trials must be >= 1");
  if (config.n < 2) throw ConfigError("invariance: n must be >= 2");
  RunRecord record = start_record(config);
  const MixingEnsemble ensemble = make_ensemble(config);
  const std::size_t n_views = ensemble.num_views();
  if (config.corrupt_view < 0 || static_cast<std::size_t>(config.corrupt_view) > n_views)
    throw ConfigError("invariance: corrupt_view out of range");
  const double tol = config.tolerance("wiring", 1e-10);
  const double roundtrip_tol = config.tolerance("roundtrip", 1e-8);
  const auto trials = static_cast<std::size_t>(config.trials);

  std::vector<views::InvarianceReport> reports(trials);
  parallel_trials(
      trials,
      [&](std::size_t k) {
        const SeededStream maps_stream{config.seed, hash_combine(streams::kMaps, k)};
        std::vector<views::InvertibleMapSpec> generators;
        for (std::size_t i = 0; i < n_views; ++i) {
          const Index d = ensemble.view_dim(i);
          generators.push_back(config.maps.empty()
                                   ? views::random_map_spec(d, maps_stream.substream(i))
                                   : views::make_map_spec(config.maps[i % config.maps.size()], d, maps_stream.substream(i)));
        }
        auto decoders = generators;
        if (config.corrupt_view > 0) {
          auto engine = maps_stream.substream(0x636F7272ULL).engine();
          auto& bad = decoders[static_cast<std::size_t>(config.corrupt_view - 1)];
          bad.post_rotation = haar_orthogonal(bad.dim(), engine);
        }
        reports[k] = views::invariance_check(ensemble, generators, config.prior, config.n,
                                             trial_stream(config.seed, k), &decoders, tol);
      },
      [](std::size_t k) { return "invariance trial " + std::to_string(k); });

  Table table;
  table.columns = {"trial"};
  append(table.columns, "view_dev_", view_labels(n_views));
  append(table.columns, "pair_dev_", pair_labels(n_views));
  table.columns.insert(table.columns.end(), {"max_moment_dev", "roundtrip_err", "passed", "failing_view"});
  bool all_passed = true, control_localized = true;
  double worst = 0.0, worst_roundtrip = 0.0;
  for (std::size_t k = 0; k < trials; ++k) {
    const auto& r = reports[k];
    std::vector<Cell> row{static_cast<std::int64_t>(k)};
    push_all(row, r.view_moment_deviation);
    push_all(row, r.pair_moment_deviation);
    row.emplace_back(r.max_moment_deviation);
    row.emplace_back(r.max_roundtrip_error);
    row.emplace_back(r.passed);
    row.emplace_back(static_cast<std::int64_t>(r.failing_view ? *r.failing_view + 1 : 0));
    table.add_row(std::move(row));
    all_passed = all_passed && r.passed;
    control_localized = control_localized && !r.passed &&
                        r.failing_view == static_cast<std::size_t>(std::max(config.corrupt_view - 1, 0));
    worst = std::max(worst, r.max_moment_deviation);
    worst_roundtrip = std::max(worst_roundtrip, r.max_roundtrip_error);
  }
  record.tables["trials"] = std::move(table);
  record.summary = {{"all_passed", all_passed},
                    {"max_moment_dev", worst},
                    {"max_roundtrip_err", worst_roundtrip},
                    {"tolerance", tol},
                    {"roundtrip_tolerance", roundtrip_tol},
                    {"negative_control", config.corrupt_view > 0}};
  const bool passed = config.corrupt_view > 0 ? control_localized : (all_passed && worst_roundtrip < roundtrip_tol);
  if (config.corrupt_view > 0) record.summary["negative_control_localized"] = control_localized;
  finish(record, start, passed);
  return record;
}

RunRecord run_estimate(const ExperimentConfig& config) {
  const auto start = Clock::now();
  if (config.datasets.empty()) throw ConfigError("estimate: no datasets listed");
  RunRecord record = start_record(config);
  std::vector<ViewDataset> data;
  for (const auto& path : config.datasets) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read dataset '" + path.string() + "'");
    if (path.extension() == ".bin") {
      data.push_back(read_binary(in));
    } else {
      for (auto& v : read_csv(in)) data.push_back(std::move(v));
    }
  }
  std::sort(data.begin(), data.end(), [](const auto& a, const auto& b) { return a.view_index < b.view_index; });
  for (std::size_t k = 1; k < data.size(); ++k)
    if (data[k].view_index == data[k - 1].view_index) throw ConfigError("estimate: duplicate view index");
  const std::size_t n_views = data.size();
  if (n_views < 2) throw ConfigError("estimate: at least 2 views are required");
  if (!config.pair_ranks) throw ConfigError("estimate: pair_ranks is required");
  const auto& table = *config.pair_ranks;
  if (table.size() != n_views) throw ConfigError("estimate: pair_ranks must be an N×N table");
  PairRanks ranks(n_views);
  for (std::size_t i = 0; i < n_views; ++i) {
    if (table[i].size() != n_views) throw ConfigError("estimate: pair_ranks must be an N×N table");
    for (std::size_t j = i + 1; j < n_views; ++j) ranks.set(i, j, table[i][j]);
  }

  const auto rec = intersection::multiview_recover(data, ranks, config.view_ranks, config.tau);
  Table pairs_table;
  pairs_table.columns = {"view_i", "view_j", "k", "singular_value"};
  for (const auto& p : rec.pairs)
    for (Index k = 0; k < p.singular_values.size(); ++k)
      pairs_table.add_row({static_cast<std::int64_t>(data[p.i].view_index), static_cast<std::int64_t>(data[p.j].view_index),
                           static_cast<std::int64_t>(k + 1), p.singular_values(k)});
  Table eig_table;
  eig_table.columns = {"view", "k", "eigenvalue"};
  Table basis_table;
  basis_table.columns = {"view", "row", "col", "value"};
  json view_summary = json::array();
  for (std::size_t i = 0; i < n_views; ++i) {
    const auto& v = rec.views[i];
    const auto view = static_cast<std::int64_t>(data[i].view_index);
    for (Index k = 0; k < v.eigenvalues.size(); ++k)
      eig_table.add_row({view, static_cast<std::int64_t>(k + 1), v.eigenvalues(k)});
    for (Index c = 0; c < v.basis.rank(); ++c)
      for (Index r = 0; r < v.basis.ambient_dim(); ++r)
        basis_table.add_row({view, static_cast<std::int64_t>(r), static_cast<std::int64_t>(c), v.basis.matrix()(r, c)});
    view_summary.push_back({{"view", view}, {"rank", static_cast<std::int64_t>(v.rank)}, {"gap", v.gap},
                            {"low_confidence", v.low_confidence}});
  }
  record.tables["pairs"] = std::move(pairs_table);
  record.tables["eigenvalues"] = std::move(eig_table);
  record.tables["bases"] = std::move(basis_table);
  record.summary = {{"gcca_objective", cca::gcca_objective(data)}, {"views", view_summary}};
  finish(record, start, true);
  return record;
}

RunRecord run_construct_spectrum(const ExperimentConfig& config) {
  const auto start = Clock::now();
  if (!config.spectra) throw ConfigError("construct-spectrum: spectra are required");
  RunRecord record = start_record(config);
  const auto& spectra = *config.spectra;
  const auto gains = solve_per_view_gains(spectra);
  const auto ensemble = build_mixing(gains, spectra.view_dims, SeededStream{config.seed, streams::kEnsemble});

  Table gains_table;
  gains_table.columns = {"view", "mode", "gain", "sigma"};
  for (std::size_t i = 0; i < 3; ++i)
    for (Index k = 0; k < spectra.r; ++k)
      gains_table.add_row({static_cast<std::int64_t>(i + 1), static_cast<std::int64_t>(k + 1), gains[i](k),
                           ensemble.singular_values[i](k)});
  Table pop;
  pop.columns = {"pair", "k", "singular_value", "target", "abs_err"};
  double worst = 0.0;
  json ranks = json::object();
  for (const auto& [i, j] : unordered_pairs(3)) {
    const auto p = population_normalized_crosscov(ensemble, i, j);
    const auto& target = spectra.t[pair_slot(i, j)];
    for (Index k = 0; k < p.svd.singular_values.size(); ++k) {
      const double want = k < spectra.r ? target[static_cast<std::size_t>(k)] : 0.0;
      const double err = std::abs(p.svd.singular_values(k) - want);
      worst = std::max(worst, err);
      pop.add_row({pair_label(i, j), static_cast<std::int64_t>(k + 1), p.svd.singular_values(k), want, err});
    }
    ranks[pair_label(i, j)] = static_cast<std::int64_t>(p.rank);
  }
  Table mixing;
  mixing.columns = {"view", "row", "col", "value"};
  for (std::size_t i = 0; i < 3; ++i)
    for (Index r = 0; r < ensemble.mixing[i].rows(); ++r)
      for (Index c = 0; c < ensemble.mixing[i].cols(); ++c)
        mixing.add_row({static_cast<std::int64_t>(i + 1), static_cast<std::int64_t>(r), static_cast<std::int64_t>(c),
                        ensemble.mixing[i](r, c)});
  record.tables["gains"] = std::move(gains_table);
  record.tables["population"] = std::move(pop);
  record.tables["mixing"] = std::move(mixing);
  const double tol = config.tolerance("spectrum", 1e-10);
  record.summary = {{"max_abs_err", worst}, {"ranks", ranks}, {"tolerance", tol}};
  finish(record, start, worst <= tol);
  return record;
}

RunRecord run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::Rate: return run_rate_experiment(config);
    case ExperimentKind::Dominance: return run_dominance_ablation(config);
    case ExperimentKind::Intersection: return run_intersection_experiment(config);
    case ExperimentKind::HermiteCert: return run_hermite_cert(config);
    case ExperimentKind::Invariance: return run_invariance_experiment(config);
    case ExperimentKind::Estimate: return run_estimate(config);
    case ExperimentKind::ConstructSpectrum: return run_construct_spectrum(config);
  }
  throw ConfigError("unknown experiment kind");
}

}  // namespace mvcca::harness
