#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "adsim/scenario.hpp"

namespace adsim::testing {

// Single-query, CTR 1, full-clause scenario with the same value types for
// every bidder.
inline ScenarioDesc single_query_desc(std::size_t num_bidders,
                                      const std::vector<double>& values,
                                      std::vector<double> grid) {
  ScenarioDesc d;
  d.id = "test";
  d.queries = {"q"};
  d.query_dist = Eigen::VectorXd::Ones(1);
  BidderSpec b;
  const auto m = static_cast<Eigen::Index>(values.size());
  b.type_dist = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  b.values.resize(m, 1);
  b.ctrs = TypeQueryTable::Ones(m, 1);
  for (Eigen::Index k = 0; k < m; ++k) {
    b.types.push_back(std::to_string(k));
    b.values(k, 0) = values[static_cast<std::size_t>(k)];
  }
  d.bidders.assign(num_bidders, b);
  d.bid_grid = std::move(grid);
  d.clauses = full_clause(1);
  d.mechanism = MechanismSpec::second_price();
  d.horizon = 1000;
  d.env_seed = 5;
  return d;
}

// The two-query, three-type environment with every clause available.
inline ScenarioDesc multi_query_desc() {
  ScenarioDesc d;
  d.id = "multi";
  d.queries = {"q1", "q2"};
  d.query_dist = Eigen::Vector2d(0.5, 0.5);
  BidderSpec b;
  b.types = {"1", "2", "3"};
  b.type_dist = Eigen::Vector3d::Constant(1.0 / 3.0);
  b.values.resize(3, 2);
  b.values << 0.5, 0.25, 0.25, 1.0, 0.25, 1.0;
  b.ctrs.resize(3, 2);
  b.ctrs << 0.3, 0.1, 0.1, 0.1, 0.1, 0.2;
  d.bidders.assign(3, b);
  d.bid_grid = fraction_grid(20, 20);
  d.clauses = all_clauses(2);
  d.mechanism = MechanismSpec::second_price();
  d.horizon = 1000;
  d.env_seed = 9;
  return d;
}

// Case analysis for equal CTRs, written directly from the rule statements.
struct OracleOutcome {
  bool sold = false;
  std::vector<std::size_t> tied;
  double price = 0.0;
};

inline OracleOutcome equal_ctr_oracle(
    const std::vector<std::optional<double>>& bids, PriceRule rule, double floor) {
  OracleOutcome o;
  std::vector<double> eligible;
  for (const auto& b : bids) {
    if (b) eligible.push_back(*b);
  }
  if (eligible.empty()) return o;
  std::sort(eligible.rbegin(), eligible.rend());
  const double b1 = eligible[0];
  const double b2 = eligible.size() > 1 ? eligible[1] : 0.0;
  for (std::size_t i = 0; i < bids.size(); ++i) {
    if (bids[i] && *bids[i] == b1) o.tied.push_back(i);
  }
  switch (rule) {
    case PriceRule::FirstPrice:
      o.price = b1;
      break;
    case PriceRule::SecondPrice:
      o.price = b2;
      break;
    case PriceRule::HardReserve:
      if (b1 < floor || (b1 == 0.0 && floor > 0.0)) {
        o.tied.clear();
        return o;
      }
      o.price = std::max(b2, floor);
      break;
    case PriceRule::SoftFloor:
      if (b2 >= floor) {
        o.price = b2;
      } else if (b1 >= floor) {
        o.price = floor;
      } else {
        o.price = b1;
      }
      break;
  }
  if (b1 == 0.0) o.price = 0.0;
  o.sold = true;
  return o;
}

}  // namespace adsim::testing
