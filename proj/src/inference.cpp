#include "adsim/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "adsim/io.hpp"

namespace adsim {

namespace {

std::size_t nearest_rank(double p, std::uint64_t n) {
  const double x = p * static_cast<double>(n) / 100.0;
  const double r = std::ceil(x - 1e-9 * std::max(1.0, x));
  return static_cast<std::size_t>(std::clamp(r, 1.0, static_cast<double>(n)));
}

void check_percentiles(std::span<const double> percentiles) {
  if (percentiles.empty()) throw std::invalid_argument("no percentiles given");
  for (std::size_t k = 0; k < percentiles.size(); ++k) {
    if (!(percentiles[k] > 0.0 && percentiles[k] < 100.0) ||
        (k > 0 && !(percentiles[k] > percentiles[k - 1]))) {
      throw std::invalid_argument(
          "percentiles must be strictly increasing inside (0, 100)");
    }
  }
}

}  // namespace

std::vector<double> observed_percentiles(std::vector<double> samples,
                                         std::span<const double> percentiles) {
  if (samples.empty()) throw std::invalid_argument("no bid samples");
  check_percentiles(percentiles);
  std::sort(samples.begin(), samples.end());
  std::vector<double> out;
  for (double p : percentiles) {
    out.push_back(samples[nearest_rank(p, samples.size()) - 1]);
  }
  return out;
}

std::vector<double> histogram_percentiles(std::span<const double> support,
                                          std::span<const std::uint64_t> counts,
                                          std::span<const double> percentiles) {
  if (support.size() != counts.size()) {
    throw std::invalid_argument("support and counts differ in length");
  }
  check_percentiles(percentiles);
  const std::uint64_t n =
      std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (n == 0) throw std::invalid_argument("no bid samples");
  std::vector<double> out;
  for (double p : percentiles) {
    const std::uint64_t rank = nearest_rank(p, n);
    std::uint64_t seen = 0;
    std::size_t k = 0;
    while (seen + counts[k] < rank) seen += counts[k++];
    out.push_back(support[k]);
  }
  return out;
}

std::vector<double> percentile_weights(std::span<const double> percentiles,
                                       PercentileWeights rule) {
  check_percentiles(percentiles);
  const std::size_t m = percentiles.size();
  std::vector<double> w(m);
  if (rule == PercentileWeights::Cdf) {
    double prev = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      w[k] = (percentiles[k] - prev) / percentiles.back();
      prev = percentiles[k];
    }
    return w;
  }
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double lo = k == 0 ? 0.0 : 0.5 * (percentiles[k - 1] + percentiles[k]);
    const double hi = k + 1 == m ? 100.0 : 0.5 * (percentiles[k] + percentiles[k + 1]);
    w[k] = hi - lo;
    total += w[k];
  }
  for (double& x : w) x /= total;
  return w;
}

double update_value(double v, double b_observed, double b_predicted, double alpha) {
  double sigma = 1.0;
  if (v >= kValueGuard && b_predicted >= kValueGuard) sigma = b_predicted / v;
  return v + alpha * (b_observed / sigma - v);
}

std::vector<double> flatten_monotone(std::vector<double> values) {
  for (std::size_t k = 1; k < values.size(); ++k) {
    values[k] = std::max(values[k], values[k - 1]);
  }
  return values;
}

double mae(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("mae: length mismatch");
  if (a.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return s / static_cast<double>(a.size());
}

std::vector<double> inference_grid(double max_bid, double step, double headroom) {
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
  const double top = std::max(1.0, std::ceil(max_bid * headroom));
  const auto steps = static_cast<long>(std::llround(top / step));
  std::vector<double> grid;
  for (long k = 0; k <= steps; ++k) grid.push_back(static_cast<double>(k) * step);
  return grid;
}

Scenario symmetric_value_scenario(std::span<const double> values,
                                  std::span<const double> weights,
                                  const MechanismSpec& mechanism,
                                  const InferenceConfig& config,
                                  std::vector<double> bid_grid) {
  if (values.size() != weights.size()) {
    throw std::invalid_argument("values and weights differ in length");
  }
  ScenarioDesc d;
  d.id = "inference";
  d.queries = {"q"};
  d.query_dist = Eigen::VectorXd::Ones(1);
  BidderSpec b;
  const auto m = static_cast<Eigen::Index>(values.size());
  b.type_dist.resize(m);
  b.values.resize(m, 1);
  b.ctrs = TypeQueryTable::Ones(m, 1);
  for (Eigen::Index k = 0; k < m; ++k) {
    b.types.push_back(format_double(values[static_cast<std::size_t>(k)]));
    b.type_dist[k] = weights[static_cast<std::size_t>(k)];
    b.values(k, 0) = std::max(0.0, values[static_cast<std::size_t>(k)]);
  }
  d.bidders.assign(config.num_bidders, b);
  d.bid_grid = std::move(bid_grid);
  d.clauses = full_clause(1);
  d.mechanism = mechanism;
  d.learner.algorithm = Algorithm::Hedge;
  d.learner.eta = config.eta;
  d.horizon = config.horizon;
  d.window_fraction = config.window_fraction;
  d.env_seed = config.env_seed;
  return validate_scenario(std::move(d));
}

PercentileBids simulate_bid_percentiles(const Scenario& scenario,
                                        const InferenceConfig& config) {
  const BatchResult batch =
      run_batch(scenario, config.runs_per_iteration, config.master_seed);
  const std::size_t nb = scenario.num_bids();
  std::vector<double> support(nb);
  for (std::size_t k = 0; k < nb; ++k) support[k] = scenario.bid(k);

  PercentileBids out;
  out.mean.assign(config.percentiles.size(), 0.0);
  for (const RunResult& run : batch.runs) {
    std::vector<std::uint64_t> counts(nb, 0);
    const BidHistogram& h = run.bid_histogram;
    for (std::size_t i = 0; i < h.num_bidders(); ++i) {
      for (std::size_t t = 0; t < h.num_types(i); ++t) {
        for (std::size_t a = 0; a < h.num_actions(); ++a) {
          counts[scenario.action_at(a).bid_index] += h.count(i, t, a);
        }
      }
    }
    out.per_run.push_back(histogram_percentiles(support, counts, config.percentiles));
    for (std::size_t k = 0; k < out.mean.size(); ++k) {
      out.mean[k] += out.per_run.back()[k];
    }
  }
  for (double& x : out.mean) x /= static_cast<double>(batch.runs.size());
  out.mean_revenue = batch.mean;
  return out;
}

InferenceResult infer_values(std::span<const double> observed_bids,
                             const MechanismSpec& mechanism,
                             const InferenceConfig& config) {
  check_percentiles(config.percentiles);
  if (observed_bids.size() != config.percentiles.size()) {
    throw std::invalid_argument("one observed bid per percentile required");
  }
  if (config.max_iterations == 0 || config.runs_per_iteration == 0) {
    throw std::invalid_argument("iterations and runs must be >= 1");
  }
  if (!(config.alpha > 0.0 && config.alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1]");
  }
  InferenceResult result;
  result.percentiles = config.percentiles;
  result.observed = flatten_monotone({observed_bids.begin(), observed_bids.end()});
  for (double b : result.observed) {
    if (!(b >= 0.0)) throw std::invalid_argument("observed bids must be >= 0");
  }

  const auto weights = percentile_weights(config.percentiles, config.weights);
  const double max_bid =
      *std::max_element(result.observed.begin(), result.observed.end());
  const auto grid = inference_grid(max_bid, config.grid_step, config.grid_headroom);

  std::vector<double> values = result.observed;
  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    const Scenario scenario =
        symmetric_value_scenario(values, weights, mechanism, config, grid);
    PercentileBids bids = simulate_bid_percentiles(scenario, config);

    IterationRecord rec;
    rec.iteration = it;
    rec.values = values;
    rec.predicted = bids.mean;
    rec.predicted_per_run = std::move(bids.per_run);
    rec.mae = mae(result.observed, rec.predicted);
    result.history.push_back(std::move(rec));
    const IterationRecord& last = result.history.back();

    double worst = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      worst = std::max(worst, std::abs(result.observed[k] - last.predicted[k]));
    }
    if (worst < 0.5 * config.grid_step) {
      result.converged = true;
      break;
    }
    for (std::size_t k = 0; k < values.size(); ++k) {
      values[k] = std::max(0.0, update_value(values[k], result.observed[k],
                                             last.predicted[k], config.alpha));
    }
    values = flatten_monotone(std::move(values));
  }

  for (std::size_t k = 1; k < result.history.size(); ++k) {
    if (result.history[k].mae < result.history[result.best].mae) result.best = k;
  }
  return result;
}

ShadingReport shading_report(std::span<const double> values,
                             std::span<const double> predicted,
                             const std::vector<std::vector<double>>& per_run) {
  if (values.size() != predicted.size()) {
    throw std::invalid_argument("values and predicted bids differ in length");
  }
  auto shade = [&](std::span<const double> bids) {
    std::vector<double> s(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
      s[k] = values[k] < kValueGuard ? 0.0 : 1.0 - bids[k] / values[k];
    }
    return s;
  };
  auto average = [](const std::vector<double>& xs) {
    return xs.empty() ? 0.0
                      : std::accumulate(xs.begin(), xs.end(), 0.0) /
                            static_cast<double>(xs.size());
  };

  ShadingReport r;
  r.values.assign(values.begin(), values.end());
  r.predicted.assign(predicted.begin(), predicted.end());
  r.shading = shade(predicted);
  r.mean = average(r.shading);
  r.ci_low = r.ci_high = r.mean;
  if (per_run.size() >= 2) {
    std::vector<double> run_means;
    for (const auto& bids : per_run) {
      if (bids.size() != values.size()) {
        throw std::invalid_argument("per-run predictions differ in length");
      }
      run_means.push_back(average(shade(bids)));
    }
    const double m = average(run_means);
    double ss = 0.0;
    for (double x : run_means) ss += (x - m) * (x - m);
    const double n = static_cast<double>(run_means.size());
    const double half = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    r.ci_low = r.mean - half;
    r.ci_high = r.mean + half;
  }
  return r;
}

}  // namespace adsim
