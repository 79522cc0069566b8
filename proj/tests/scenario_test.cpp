#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "adsim/scenario.hpp"
#include "support.hpp"

namespace adsim {
namespace {

using testing::multi_query_desc;
using testing::single_query_desc;

ScenarioErrc error_code(ScenarioDesc d) {
  try {
    validate_scenario(std::move(d));
  } catch (const ScenarioError& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a ScenarioError";
  return ScenarioErrc::InvalidParameter;
}

TEST(ValidateScenario, RejectsQueryDistributionNotSummingToOne) {
  ScenarioDesc d = multi_query_desc();
  d.query_dist = Eigen::Vector2d(0.6, 0.5);
  try {
    validate_scenario(d);
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.code(), ScenarioErrc::NotNormalized);
    EXPECT_NE(std::string(e.what()).find("distribution not normalized"),
              std::string::npos);
  }
}

TEST(ValidateScenario, RejectsNonNormalizedTypeDistribution) {
  ScenarioDesc d = multi_query_desc();
  d.bidders[1].type_dist = Eigen::Vector3d(0.5, 0.5, 0.5);
  EXPECT_EQ(error_code(d), ScenarioErrc::NotNormalized);
}

TEST(ValidateScenario, AcceptsSumWithinTolerance) {
  ScenarioDesc d = multi_query_desc();
  d.query_dist = Eigen::Vector2d(0.5 + 5e-13, 0.5);
  EXPECT_NO_THROW(validate_scenario(d));
  d.query_dist = Eigen::Vector2d(0.5 + 5e-12, 0.5);
  EXPECT_EQ(error_code(d), ScenarioErrc::NotNormalized);
}

TEST(ValidateScenario, RejectsCtrOutsideUnitInterval) {
  ScenarioDesc d = multi_query_desc();
  d.bidders[0].ctrs(0, 0) = 1.5;
  EXPECT_EQ(error_code(d), ScenarioErrc::CtrOutOfRange);
  d.bidders[0].ctrs(0, 0) = -0.1;
  EXPECT_EQ(error_code(d), ScenarioErrc::CtrOutOfRange);
}

TEST(ValidateScenario, RejectsEmptyClauseSpace) {
  ScenarioDesc d = multi_query_desc();
  d.clauses.clear();
  EXPECT_EQ(error_code(d), ScenarioErrc::EmptyClauseSpace);
}

TEST(ValidateScenario, RejectsNonIncreasingOrEmptyBidGrid) {
  ScenarioDesc d = multi_query_desc();
  d.bid_grid = {0.0, 0.5, 0.5, 1.0};
  EXPECT_EQ(error_code(d), ScenarioErrc::BidGridNotIncreasing);
  d.bid_grid.clear();
  EXPECT_EQ(error_code(d), ScenarioErrc::BidGridNotIncreasing);
  d.bid_grid = {-0.1, 1.0};
  EXPECT_EQ(error_code(d), ScenarioErrc::BidGridNotIncreasing);
}

TEST(ValidateScenario, RejectsShapeMismatchAndNegativeValues) {
  ScenarioDesc d = multi_query_desc();
  d.bidders[2].values.resize(2, 2);
  d.bidders[2].values.setZero();
  EXPECT_EQ(error_code(d), ScenarioErrc::ShapeMismatch);
  d = multi_query_desc();
  d.bidders[0].values(1, 1) = -1.0;
  EXPECT_EQ(error_code(d), ScenarioErrc::NegativeValue);
}

TEST(ValidateScenario, RejectsClauseNamingUnknownQuery) {
  ScenarioDesc d = multi_query_desc();
  d.clauses.push_back(0b100);
  EXPECT_EQ(error_code(d), ScenarioErrc::InvalidClause);
}

TEST(ValidateScenario, RejectsNegativeFloorAndBadHorizon) {
  ScenarioDesc d = multi_query_desc();
  d.mechanism = MechanismSpec::soft_floor(-0.1);
  EXPECT_EQ(error_code(d), ScenarioErrc::InvalidParameter);
  d = multi_query_desc();
  d.horizon = 0;
  EXPECT_EQ(error_code(d), ScenarioErrc::InvalidParameter);
}

TEST(ValidateScenario, ComputesBoundsAndWindow) {
  ScenarioDesc d = multi_query_desc();
  d.horizon = 400000;
  const Scenario s = validate_scenario(d);
  EXPECT_EQ(s.v_max(), 1.0);
  EXPECT_EQ(s.b_max(), 1.0);
  EXPECT_EQ(s.window_length(), 40000);
  EXPECT_EQ(s.window_start(), 360000);
}

TEST(ActionSpace, MultiQueryGridHas84ActionsClauseMajor) {
  const Scenario s = validate_scenario(multi_query_desc());
  const auto actions = action_space(s);
  ASSERT_EQ(actions.size(), 84u);
  for (std::size_t k = 0; k < actions.size(); ++k) {
    EXPECT_EQ(actions[k].clause_index, k / 21);
    EXPECT_EQ(actions[k].bid_index, k % 21);
    EXPECT_EQ(s.action_index(actions[k]), k);
    EXPECT_EQ(s.action_at(k), actions[k]);
  }
  EXPECT_EQ(s.clause(0), 0u);
  EXPECT_EQ(s.clause(3), 3u);
}

TEST(ActionSpace, SingleQueryFullClauseHas21Actions) {
  const Scenario s = validate_scenario(single_query_desc(2, {0.0, 1.0}, fraction_grid(20, 20)));
  EXPECT_EQ(action_space(s).size(), 21u);
}

TEST(FractionGrid, HitsDecimalLiteralsExactly) {
  const auto g = fraction_grid(20, 20);
  ASSERT_EQ(g.size(), 21u);
  EXPECT_EQ(g[13], 0.65);
  EXPECT_EQ(g[7], 0.35);
  const auto g2 = fraction_grid(44, 20);
  EXPECT_EQ(g2[36], 1.8);
  EXPECT_EQ(g2[44], 2.2);
}

TEST(ParseMechanism, ParsesAllForms) {
  EXPECT_EQ(parse_mechanism("first").rule, PriceRule::FirstPrice);
  EXPECT_EQ(parse_mechanism("second").rule, PriceRule::SecondPrice);
  const auto r = parse_mechanism("reserve:0.6");
  EXPECT_EQ(r.rule, PriceRule::HardReserve);
  EXPECT_EQ(r.floor, 0.6);
  const auto s = parse_mechanism("soft:0.65");
  EXPECT_EQ(s.rule, PriceRule::SoftFloor);
  EXPECT_EQ(s.floor, 0.65);
  EXPECT_THROW(parse_mechanism("soft"), ScenarioError);
  EXPECT_THROW(parse_mechanism("soft:x"), ScenarioError);
  EXPECT_THROW(parse_mechanism("vickrey"), ScenarioError);
}

TEST(EnvSequence, IsPureFunctionOfScenarioAndSeed) {
  ScenarioDesc d = multi_query_desc();
  d.horizon = 5000;
  const Scenario s = validate_scenario(d);
  const EnvSequence a = sample_env_sequence(s);
  const EnvSequence b = sample_env_sequence(s);
  EXPECT_EQ(a.queries, b.queries);
  EXPECT_EQ(a.types, b.types);
  d.env_seed += 1;
  const EnvSequence c = sample_env_sequence(validate_scenario(d));
  EXPECT_NE(a.types, c.types);
}

TEST(EnvSequence, MarginalFrequenciesPassChiSquare) {
  ScenarioDesc d = multi_query_desc();
  d.query_dist = Eigen::Vector2d(0.3, 0.7);
  d.bidders[1].type_dist = Eigen::Vector3d(0.2, 0.3, 0.5);
  d.horizon = 100000;
  const Scenario s = validate_scenario(d);
  const EnvSequence env = sample_env_sequence(s);
  ASSERT_EQ(env.length(), 100000u);

  std::array<double, 2> qc{};
  std::array<std::array<double, 3>, 3> tc{};
  for (std::size_t t = 0; t < env.length(); ++t) {
    qc[env.query(t)] += 1.0;
    for (std::size_t i = 0; i < 3; ++i) tc[i][env.types_at(t)[i]] += 1.0;
  }
  auto chi2 = [&](const auto& counts, const Eigen::VectorXd& p) {
    double x = 0.0;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const double e = p[k] * static_cast<double>(env.length());
      x += (counts[k] - e) * (counts[k] - e) / e;
    }
    return x;
  };
  EXPECT_LT(chi2(qc, s.query_dist()), 10.83);  // 1 dof, p = 0.001
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_LT(chi2(tc[i], s.desc().bidders[i].type_dist), 13.82);  // 2 dof
  }
}

}  // namespace
}  // namespace adsim
