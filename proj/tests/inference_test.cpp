#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "adsim/inference.hpp"

namespace adsim {
namespace {

const std::vector<double> kUniformTruth = {0.25, 0.625, 1.0, 1.25, 1.5, 1.875, 2.25};

TEST(ObservedPercentiles, SingleSample) {
  const auto p = observed_percentiles({0.5}, kDefaultPercentiles);
  for (double x : p) EXPECT_EQ(x, 0.5);
}

TEST(ObservedPercentiles, OneToHundredNearestRank) {
  std::vector<double> xs(100);
  std::iota(xs.begin(), xs.end(), 1.0);
  std::shuffle(xs.begin(), xs.end(), std::mt19937_64(1));
  const std::vector<double> levels = {10, 25, 50, 90, 99};
  EXPECT_EQ(observed_percentiles(xs, levels), (std::vector<double>{10, 25, 50, 90, 99}));
}

TEST(ObservedPercentiles, UniformTruthTableReproducesItself) {
  EXPECT_EQ(observed_percentiles(kUniformTruth, kDefaultPercentiles), kUniformTruth);
  const std::vector<std::uint64_t> counts = {10, 15, 15, 10, 10, 15, 15};
  EXPECT_EQ(histogram_percentiles(kUniformTruth, counts, kDefaultPercentiles),
            kUniformTruth);
}

TEST(ObservedPercentiles, NondecreasingOnRandomSamples) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::vector<double> xs(777);
  for (auto& x : xs) x = u(gen);
  const auto p = observed_percentiles(xs, kDefaultPercentiles);
  EXPECT_TRUE(std::is_sorted(p.begin(), p.end()));
}

TEST(ObservedPercentiles, HistogramAgreesWithExpandedSample) {
  std::mt19937_64 gen(6);
  const std::vector<double> support = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint64_t> counts(support.size());
    std::vector<double> expanded;
    for (std::size_t k = 0; k < support.size(); ++k) {
      counts[k] = gen() % 7;
      expanded.insert(expanded.end(), counts[k], support[k]);
    }
    if (expanded.empty()) continue;
    EXPECT_EQ(histogram_percentiles(support, counts, kDefaultPercentiles),
              observed_percentiles(expanded, kDefaultPercentiles));
  }
}

TEST(ObservedPercentiles, Errors) {
  EXPECT_THROW(observed_percentiles({}, kDefaultPercentiles), std::invalid_argument);
  const std::vector<double> bad = {50, 40};
  EXPECT_THROW(observed_percentiles({1.0}, bad), std::invalid_argument);
  const std::vector<double> support = {0.0, 1.0};
  const std::vector<std::uint64_t> zero = {0, 0};
  EXPECT_THROW(histogram_percentiles(support, zero, kDefaultPercentiles),
               std::invalid_argument);
}

TEST(PercentileWeights, CdfAndMidpointRules) {
  const auto cdf = percentile_weights(kDefaultPercentiles, PercentileWeights::Cdf);
  const std::vector<double> expected_cdf = {10, 15, 15, 10, 10, 15, 15};
  for (std::size_t k = 0; k < 7; ++k) EXPECT_NEAR(cdf[k], expected_cdf[k] / 90.0, 1e-15);
  const auto mid = percentile_weights(kDefaultPercentiles, PercentileWeights::Midpoint);
  const std::vector<double> expected_mid = {17.5, 15, 12.5, 10, 12.5, 15, 17.5};
  for (std::size_t k = 0; k < 7; ++k) EXPECT_NEAR(mid[k], expected_mid[k] / 100.0, 1e-15);
  EXPECT_NEAR(std::accumulate(cdf.begin(), cdf.end(), 0.0), 1.0, 1e-12);
  EXPECT_NEAR(std::accumulate(mid.begin(), mid.end(), 0.0), 1.0, 1e-12);
}

TEST(UpdateValue, Examples) {
  EXPECT_NEAR(update_value(1.0, 0.4, 0.5, 0.2), 0.96, 1e-15);
  EXPECT_EQ(update_value(0.7, 0.3, 0.3, 0.2), 0.7);
  EXPECT_NEAR(update_value(1.2, 0.6, 0.4, 1.0), 0.6 * 1.2 / 0.4, 1e-15);
}

TEST(UpdateValue, GuardTreatsTinyValuesAsUnshaded) {
  EXPECT_NEAR(update_value(0.0, 0.5, 0.0, 0.5), 0.25, 1e-15);
  EXPECT_NEAR(update_value(1.0, 0.5, 0.0, 0.5), 0.75, 1e-15);
}

TEST(UpdateValue, MatchesFormulaOnRandomInputs) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  std::uniform_real_distribution<double> a(0.01, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double v = u(gen), bo = u(gen), bp = u(gen), alpha = a(gen);
    const double expected = v + alpha * (bo * v / bp - v);
    EXPECT_NEAR(update_value(v, bo, bp, alpha), expected, 1e-12 * std::abs(expected) + 1e-15);
  }
}

TEST(FlattenMonotone, Examples) {
  EXPECT_EQ(flatten_monotone({0.3, 0.2, 0.5}), (std::vector<double>{0.3, 0.3, 0.5}));
  EXPECT_EQ(flatten_monotone(kUniformTruth), kUniformTruth);
  EXPECT_EQ(flatten_monotone({0.4, 0.4, 0.4}), (std::vector<double>{0.4, 0.4, 0.4}));
  EXPECT_TRUE(flatten_monotone({}).empty());
}

TEST(FlattenMonotone, IdempotentAndNondecreasing) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> xs(9);
    for (auto& x : xs) x = u(gen);
    const auto once = flatten_monotone(xs);
    EXPECT_TRUE(std::is_sorted(once.begin(), once.end()));
    EXPECT_EQ(flatten_monotone(once), once);
    for (std::size_t k = 0; k < xs.size(); ++k) EXPECT_GE(once[k], xs[k]);
  }
}

TEST(Mae, ValuesAndErrors) {
  const std::vector<double> a = {1.0, 2.0, 3.0};
  const std::vector<double> b = {1.5, 2.0, 2.0};
  EXPECT_DOUBLE_EQ(mae(a, b), 0.5);
  EXPECT_EQ(mae(a, a), 0.0);
  const std::vector<double> c = {1.0};
  EXPECT_THROW(mae(a, c), std::invalid_argument);
}

TEST(InferenceGrid, StepAndHeadroom) {
  const auto g = inference_grid(2.25, 0.1, 1.34);
  EXPECT_EQ(g.size(), 41u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_NEAR(g.back(), 4.0, 1e-12);
  EXPECT_EQ(inference_grid(0.0, 0.1, 1.34).size(), 11u);
  EXPECT_THROW(inference_grid(1.0, 0.0, 1.34), std::invalid_argument);
}

TEST(SymmetricValueScenario, Shape) {
  InferenceConfig cfg;
  cfg.horizon = 1000;
  const auto w = percentile_weights(kDefaultPercentiles, PercentileWeights::Cdf);
  const Scenario s = symmetric_value_scenario(kUniformTruth, w, MechanismSpec::second_price(),
                                              cfg, inference_grid(2.25, 0.1, 1.34));
  EXPECT_EQ(s.num_bidders(), 2u);
  EXPECT_EQ(s.num_types(0), 7u);
  EXPECT_EQ(s.num_actions(), 41u);
  EXPECT_EQ(s.value(1, 6, 0), 2.25);
  EXPECT_EQ(s.ctr(0, 3, 0), 1.0);
  EXPECT_EQ(s.horizon(), 1000);
}

TEST(InferValues, ZeroBidsAreAFixedPoint) {
  InferenceConfig cfg;
  cfg.horizon = 4000;
  cfg.runs_per_iteration = 2;
  cfg.max_iterations = 5;
  const std::vector<double> zeros(7, 0.0);
  const auto r = infer_values(zeros, MechanismSpec::first_price(), cfg);
  EXPECT_TRUE(r.converged);
  ASSERT_EQ(r.history.size(), 1u);
  EXPECT_EQ(r.best_record().iteration, 1u);
  EXPECT_EQ(r.best_record().values, zeros);
  EXPECT_EQ(r.best_record().mae, 0.0);
}

TEST(InferValues, HistoryIsBoundedAndBestMinimizesMae) {
  InferenceConfig cfg;
  cfg.horizon = 3000;
  cfg.runs_per_iteration = 2;
  cfg.max_iterations = 4;
  const auto r = infer_values(kUniformTruth, MechanismSpec::first_price(), cfg);
  ASSERT_GE(r.history.size(), 1u);
  ASSERT_LE(r.history.size(), 4u);
  for (const auto& rec : r.history) {
    EXPECT_GE(rec.mae, r.best_record().mae);
    EXPECT_TRUE(std::is_sorted(rec.values.begin(), rec.values.end()));
    EXPECT_EQ(rec.predicted_per_run.size(), 2u);
  }
  // Deterministic.
  const auto again = infer_values(kUniformTruth, MechanismSpec::first_price(), cfg);
  EXPECT_EQ(again.best_record().values, r.best_record().values);
}

TEST(InferValues, NonMonotoneObservedBidsAreFlattened) {
  InferenceConfig cfg;
  cfg.horizon = 2000;
  cfg.runs_per_iteration = 1;
  cfg.max_iterations = 1;
  const std::vector<double> bids = {0.3, 0.2, 0.5, 0.5, 0.6, 0.7, 0.8};
  const auto r = infer_values(bids, MechanismSpec::second_price(), cfg);
  EXPECT_EQ(r.observed[1], 0.3);
}

TEST(InferValues, RejectsBadConfig) {
  InferenceConfig cfg;
  const std::vector<double> short_bids = {0.1, 0.2};
  EXPECT_THROW(infer_values(short_bids, MechanismSpec::second_price(), cfg),
               std::invalid_argument);
  cfg.alpha = 0.0;
  EXPECT_THROW(infer_values(kUniformTruth, MechanismSpec::second_price(), cfg),
               std::invalid_argument);
}

TEST(ShadingReport, Examples) {
  const std::vector<double> v = {1.0, 2.0};
  const auto same = shading_report(v, v);
  EXPECT_EQ(same.mean, 0.0);
  EXPECT_EQ(same.ci_low, 0.0);
  const std::vector<double> one = {1.0};
  const std::vector<double> bid = {0.75};
  EXPECT_DOUBLE_EQ(shading_report(one, bid).shading[0], 0.25);
  const std::vector<double> zero = {0.0};
  EXPECT_EQ(shading_report(zero, bid).shading[0], 0.0);
}

TEST(ShadingReport, IntervalOverRuns) {
  const std::vector<double> v = {1.0, 1.0};
  const std::vector<double> mean_bid = {0.8, 0.8};
  const std::vector<std::vector<double>> runs = {{0.7, 0.7}, {0.9, 0.9}};
  const auto r = shading_report(v, mean_bid, runs);
  EXPECT_NEAR(r.mean, 0.2, 1e-15);
  // Run means 0.3 and 0.1: sample sd 0.1414, half width 1.96 * 0.1414 / sqrt 2.
  EXPECT_NEAR(r.ci_high - r.mean, 1.96 * 0.1, 1e-12);
  EXPECT_NEAR(r.mean - r.ci_low, 1.96 * 0.1, 1e-12);
}

}  // namespace
}  // namespace adsim
