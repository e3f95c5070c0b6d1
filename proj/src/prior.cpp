#include "mvcca/prior.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mvcca/errors.hpp"

namespace mvcca {

PriorSpec PriorSpec::gaussian() { return {}; }

PriorSpec PriorSpec::gamma(double shape) {
  PriorSpec p;
  p.family = PriorFamily::Gamma;
  p.shape = shape;
  p.validate();
  return p;
}

PriorSpec PriorSpec::poisson(double rate) {
  PriorSpec p;
  p.family = PriorFamily::Poisson;
  p.rate = rate;
  p.validate();
  return p;
}

PriorSpec PriorSpec::negative_binomial(std::int64_t successes, double prob) {
  PriorSpec p;
  p.family = PriorFamily::NegativeBinomial;
  p.successes = successes;
  p.prob = prob;
  p.validate();
  return p;
}

PriorSpec PriorSpec::hypergeometric(std::int64_t population, std::int64_t marked, std::int64_t draws) {
  PriorSpec p;
  p.family = PriorFamily::Hypergeometric;
  p.population = population;
  p.marked = marked;
  p.draws = draws;
  p.validate();
  return p;
}

void PriorSpec::validate() const {
  switch (family) {
    case PriorFamily::Gaussian:
      return;
    case PriorFamily::Gamma:
      if (!(shape > 0.0) || !std::isfinite(shape)) throw ParameterError("gamma shape must be positive");
      return;
    case PriorFamily::Poisson:
      if (!(rate > 0.0) || !std::isfinite(rate)) throw ParameterError("poisson rate must be positive");
      return;
    case PriorFamily::NegativeBinomial:
      if (successes < 1) throw ParameterError("negative binomial successes must be >= 1");
      if (!(prob > 0.0 && prob < 1.0)) throw ParameterError("negative binomial prob must lie in (0,1)");
      return;
    case PriorFamily::Hypergeometric:
      if (population < 1) throw ParameterError("hypergeometric population must be >= 1");
      if (marked < 0 || marked > population) throw ParameterError("hypergeometric successes must lie in [0, population]");
      if (draws < 0 || draws > population) throw ParameterError("hypergeometric draws must lie in [0, population]");
      if (!(raw_sd() > 0.0)) throw ParameterError("hypergeometric parameters give zero variance");
      return;
  }
}

double PriorSpec::raw_mean() const {
  switch (family) {
    case PriorFamily::Gaussian:
      return 0.0;
    case PriorFamily::Gamma:
      return shape;
    case PriorFamily::Poisson:
      return rate;
    case PriorFamily::NegativeBinomial:
      return static_cast<double>(successes) * (1.0 - prob) / prob;
    case PriorFamily::Hypergeometric:
      return static_cast<double>(draws) * static_cast<double>(marked) / static_cast<double>(population);
  }
  return 0.0;
}

double PriorSpec::raw_sd() const {
  switch (family) {
    case PriorFamily::Gaussian:
      return 1.0;
    case PriorFamily::Gamma:
      return std::sqrt(shape);
    case PriorFamily::Poisson:
      return std::sqrt(rate);
    case PriorFamily::NegativeBinomial:
      return std::sqrt(static_cast<double>(successes) * (1.0 - prob)) / prob;
    case PriorFamily::Hypergeometric: {
      if (population < 2) return 0.0;
      const double N = static_cast<double>(population);
      const double K = static_cast<double>(marked);
      const double n = static_cast<double>(draws);
      const double var = n * (K / N) * (1.0 - K / N) * (N - n) / (N - 1.0);
      return var > 0.0 ? std::sqrt(var) : 0.0;
    }
  }
  return 1.0;
}

std::string PriorSpec::name() const {
  switch (family) {
    case PriorFamily::Gaussian: return "gaussian";
    case PriorFamily::Gamma: return "gamma";
    case PriorFamily::Poisson: return "poisson";
    case PriorFamily::NegativeBinomial: return "negative_binomial";
    case PriorFamily::Hypergeometric: return "hypergeometric";
  }
  return "unknown";
}

nlohmann::json to_json(const PriorSpec& p) {
  nlohmann::json j{{"family", p.name()}};
  switch (p.family) {
    case PriorFamily::Gaussian: break;
    case PriorFamily::Gamma: j["shape"] = p.shape; break;
    case PriorFamily::Poisson: j["rate"] = p.rate; break;
    case PriorFamily::NegativeBinomial:
      j["successes"] = p.successes;
      j["prob"] = p.prob;
      break;
    case PriorFamily::Hypergeometric:
      j["population"] = p.population;
      j["successes"] = p.marked;
      j["draws"] = p.draws;
      break;
  }
  return j;
}

PriorSpec prior_from_json(const nlohmann::json& j) {
  const std::string family = j.value("family", "gaussian");
  if (family == "gaussian") return PriorSpec::gaussian();
  if (family == "gamma") return PriorSpec::gamma(j.at("shape").get<double>());
  if (family == "poisson") return PriorSpec::poisson(j.at("rate").get<double>());
  if (family == "negative_binomial")
    return PriorSpec::negative_binomial(j.at("successes").get<std::int64_t>(), j.at("prob").get<double>());
  if (family == "hypergeometric")
    return PriorSpec::hypergeometric(j.at("population").get<std::int64_t>(), j.at("successes").get<std::int64_t>(),
                                     j.at("draws").get<std::int64_t>());
  throw ParameterError("unknown prior family '" + family + "'");
}

namespace {

// Inversion sampler over the exact pmf; support is [lo, lo + cdf.size()).
class HypergeometricTable {
 public:
  explicit HypergeometricTable(const PriorSpec& p) {
    const std::int64_t N = p.population, K = p.marked, n = p.draws;
    lo_ = std::max<std::int64_t>(0, n + K - N);
    const std::int64_t hi = std::min(n, K);
    auto lchoose = [](double a, double b) {
      return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
    };
    const double denom = lchoose(static_cast<double>(N), static_cast<double>(n));
    double acc = 0.0;
    for (std::int64_t k = lo_; k <= hi; ++k) {
      acc += std::exp(lchoose(static_cast<double>(K), static_cast<double>(k)) +
                      lchoose(static_cast<double>(N - K), static_cast<double>(n - k)) - denom);
      cdf_.push_back(acc);
    }
    for (double& c : cdf_) c /= acc;
    cdf_.back() = 1.0;
  }

  template <class Engine>
  double operator()(Engine& eng) {
    const double u = uniform_(eng);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto offset = std::min<std::ptrdiff_t>(it - cdf_.begin(), static_cast<std::ptrdiff_t>(cdf_.size()) - 1);
    return static_cast<double>(lo_ + offset);
  }

 private:
  std::int64_t lo_ = 0;
  std::vector<double> cdf_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

template <class Dist>
void fill_rows(Eigen::MatrixXd& out, const PriorSpec& prior, Dist dist, std::mt19937_64& eng) {
  const double mean = prior.raw_mean();
  const double sd = prior.raw_sd();
  for (Eigen::Index r = 0; r < out.rows(); ++r)
    for (Eigen::Index c = 0; c < out.cols(); ++c)
      out(r, c) = (static_cast<double>(dist(eng)) - mean) / sd;
}

}  // namespace

Eigen::MatrixXd sample_standardized(const PriorSpec& prior, Eigen::Index rows, Eigen::Index cols,
                                    const SeededStream& stream) {
  if (rows < 1 || cols < 1) throw DimensionError("sample_standardized needs rows >= 1 and cols >= 1");
  prior.validate();
  Eigen::MatrixXd out(rows, cols);
  auto eng = stream.engine();
  switch (prior.family) {
    case PriorFamily::Gaussian:
      fill_rows(out, prior, std::normal_distribution<double>(0.0, 1.0), eng);
      break;
    case PriorFamily::Gamma:
      fill_rows(out, prior, std::gamma_distribution<double>(prior.shape, 1.0), eng);
      break;
    case PriorFamily::Poisson:
      fill_rows(out, prior, std::poisson_distribution<long long>(prior.rate), eng);
      break;
    case PriorFamily::NegativeBinomial:
      fill_rows(out, prior, std::negative_binomial_distribution<long long>(prior.successes, prior.prob), eng);
      break;
    case PriorFamily::Hypergeometric:
      fill_rows(out, prior, HypergeometricTable(prior), eng);
      break;
  }
  return out;
}

}  // namespace mvcca
