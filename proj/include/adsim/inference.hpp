#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "adsim/scenario.hpp"
#include "adsim/simulator.hpp"

namespace adsim {

/// How percentile levels become type probabilities.
///  Cdf: level p_k carries (p_k - p_{k-1}) / p_last, with p_0 = 0.
///  Midpoint: level p_k carries the bracket between the midpoints to its
///  neighbours, clipped to [0, 100], renormalized.
enum class PercentileWeights { Cdf, Midpoint };

inline const std::vector<double> kDefaultPercentiles = {10, 25, 40, 50, 60, 75, 90};

struct InferenceConfig {
  std::vector<double> percentiles = kDefaultPercentiles;
  PercentileWeights weights = PercentileWeights::Cdf;
  double alpha = 0.2;
  std::size_t max_iterations = 100;
  std::size_t runs_per_iteration = 10;
  std::size_t num_bidders = 2;
  std::int64_t horizon = 200000;
  double window_fraction = 0.10;
  double eta = 0.02;
  double grid_step = 0.1;
  double grid_headroom = 1.34;
  std::uint64_t env_seed = 1;
  std::uint64_t master_seed = 1;
};

constexpr double kValueGuard = 1e-6;

/// Nearest-rank empirical percentiles: the sample at rank ceil(p * n / 100)
/// (at least 1) of the sorted samples. Throws on empty input.
std::vector<double> observed_percentiles(std::vector<double> samples,
                                         std::span<const double> percentiles);

/// Nearest-rank percentiles of a weighted sample given as counts per
/// support point (`support` increasing).
std::vector<double> histogram_percentiles(std::span<const double> support,
                                          std::span<const std::uint64_t> counts,
                                          std::span<const double> percentiles);

std::vector<double> percentile_weights(std::span<const double> percentiles,
                                       PercentileWeights rule);

/// v + alpha * (b_observed / sigma - v) with sigma = b_predicted / v;
/// sigma is taken as 1 when v or b_predicted is below kValueGuard.
double update_value(double v, double b_observed, double b_predicted, double alpha);

/// Running maximum, left to right.
std::vector<double> flatten_monotone(std::vector<double> values);

/// Mean absolute difference. Throws std::invalid_argument on length mismatch.
double mae(std::span<const double> a, std::span<const double> b);

/// Bid grid 0, step, 2*step, ... up to ceil(max_bid * headroom).
std::vector<double> inference_grid(double max_bid, double step, double headroom);

/// Single-query, CTR 1 symmetric scenario whose types are `values` with
/// probabilities `weights`.
Scenario symmetric_value_scenario(std::span<const double> values,
                                  std::span<const double> weights,
                                  const MechanismSpec& mechanism,
                                  const InferenceConfig& config,
                                  std::vector<double> bid_grid);

struct PercentileBids {
  std::vector<std::vector<double>> per_run;  // run x percentile
  std::vector<double> mean;                  // averaged over runs
  double mean_revenue = 0.0;
};

/// Window bid percentiles of each run (pooled over bidders and types).
PercentileBids simulate_bid_percentiles(const Scenario& scenario,
                                        const InferenceConfig& config);

struct IterationRecord {
  std::size_t iteration = 0;  // 1-based
  std::vector<double> values;
  std::vector<double> predicted;
  std::vector<std::vector<double>> predicted_per_run;
  double mae = 0.0;
};

struct InferenceResult {
  std::vector<double> percentiles;
  std::vector<double> observed;
  std::vector<IterationRecord> history;
  std::size_t best = 0;  // index into history
  bool converged = false;

  const IterationRecord& best_record() const { return history[best]; }
};

/// Iterative percentile matching: start from the observed bids as values,
/// simulate, move each value toward b_observed / sigma, flatten, repeat.
/// Stops early once every predicted bid is within half a grid step of the
/// observed one. `best` is the iteration with the smallest MAE.
InferenceResult infer_values(std::span<const double> observed_bids,
                             const MechanismSpec& mechanism,
                             const InferenceConfig& config);

struct ShadingReport {
  std::vector<double> values;
  std::vector<double> predicted;
  std::vector<double> shading;  // 1 - b/v per percentile
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Per-percentile shading 1 - b/v (0 where v < kValueGuard) and its mean.
/// With per-run predictions, the interval is a 95% normal approximation
/// over the run means; otherwise it collapses to the mean.
ShadingReport shading_report(std::span<const double> values,
                             std::span<const double> predicted,
                             const std::vector<std::vector<double>>& per_run = {});

}  // namespace adsim
