#include "adsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "adsim/rng.hpp"

namespace adsim {

namespace {

constexpr double kNormTolerance = 1e-12;
constexpr std::size_t kMaxQueries = 16;

void check_distribution(const Eigen::VectorXd& dist, std::size_t expected,
                        const std::string& field) {
  if (static_cast<std::size_t>(dist.size()) != expected) {
    throw ScenarioError(ScenarioErrc::ShapeMismatch,
                        "shape mismatch: " + field + " has " +
                            std::to_string(dist.size()) + " entries, expected " +
                            std::to_string(expected));
  }
  for (Eigen::Index k = 0; k < dist.size(); ++k) {
    if (!std::isfinite(dist[k]) || dist[k] < 0.0) {
      throw ScenarioError(ScenarioErrc::NotNormalized,
                          "distribution not normalized: " + field +
                              " has a negative or non-finite entry");
    }
  }
  if (std::abs(dist.sum() - 1.0) > kNormTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "distribution not normalized: " << field << " sums to " << dist.sum();
    throw ScenarioError(ScenarioErrc::NotNormalized, os.str());
  }
}

void check_table_shape(const TypeQueryTable& table, std::size_t types,
                       std::size_t queries, const std::string& field) {
  if (static_cast<std::size_t>(table.rows()) != types ||
      static_cast<std::size_t>(table.cols()) != queries) {
    throw ScenarioError(ScenarioErrc::ShapeMismatch,
                        "shape mismatch: " + field + " must be " +
                            std::to_string(types) + "x" +
                            std::to_string(queries));
  }
}

}  // namespace

std::string mechanism_kind(const MechanismSpec& m) {
  switch (m.rule) {
    case PriceRule::FirstPrice:
      return "first";
    case PriceRule::SecondPrice:
      return "second";
    case PriceRule::HardReserve:
      return "reserve";
    case PriceRule::SoftFloor:
      return "soft";
  }
  return "unknown";
}

MechanismSpec parse_mechanism(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  auto parse_floor = [&]() {
    if (colon == std::string::npos) {
      throw ScenarioError(ScenarioErrc::InvalidParameter,
                          "invalid mechanism: '" + text + "' needs a floor");
    }
    std::size_t used = 0;
    const std::string number = text.substr(colon + 1);
    double value = 0.0;
    try {
      value = std::stod(number, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != number.size() || number.empty()) {
      throw ScenarioError(ScenarioErrc::InvalidParameter,
                          "invalid mechanism: bad floor in '" + text + "'");
    }
    return value;
  };
  if (kind == "first") return MechanismSpec::first_price();
  if (kind == "second") return MechanismSpec::second_price();
  if (kind == "reserve") return MechanismSpec::hard_reserve(parse_floor());
  if (kind == "soft") return MechanismSpec::soft_floor(parse_floor());
  throw ScenarioError(ScenarioErrc::InvalidParameter,
                      "invalid mechanism: '" + text + "'");
}

Scenario validate_scenario(ScenarioDesc desc) {
  const std::size_t num_queries = desc.queries.size();
  if (num_queries == 0 || num_queries > kMaxQueries) {
    throw ScenarioError(ScenarioErrc::InvalidParameter,
                        "invalid parameter: queries must hold 1.." +
                            std::to_string(kMaxQueries) + " entries");
  }
  check_distribution(desc.query_dist, num_queries, "query_dist");

  if (desc.bidders.empty()) {
    throw ScenarioError(ScenarioErrc::InvalidParameter,
                        "invalid parameter: num_bidders must be positive");
  }
  double v_max = 0.0;
  for (std::size_t i = 0; i < desc.bidders.size(); ++i) {
    const auto& b = desc.bidders[i];
    const std::string prefix = "bidders[" + std::to_string(i) + "].";
    if (b.types.empty() ||
        b.types.size() > std::numeric_limits<TypeIndex>::max()) {
      throw ScenarioError(ScenarioErrc::InvalidParameter,
                          "invalid parameter: " + prefix + "types is empty");
    }
    for (const auto& label : b.types) {
      if (label.empty() || label.find_first_of(",\r\n") != std::string::npos) {
        throw ScenarioError(ScenarioErrc::InvalidParameter,
                            "invalid parameter: " + prefix +
                                "types labels must be nonempty without commas");
      }
    }
    check_distribution(b.type_dist, b.types.size(), prefix + "type_dist");
    check_table_shape(b.values, b.types.size(), num_queries, prefix + "values");
    check_table_shape(b.ctrs, b.types.size(), num_queries, prefix + "ctrs");
    for (Eigen::Index r = 0; r < b.values.rows(); ++r) {
      for (Eigen::Index c = 0; c < b.values.cols(); ++c) {
        const double v = b.values(r, c);
        if (!std::isfinite(v) || v < 0.0) {
          throw ScenarioError(ScenarioErrc::NegativeValue,
                              "value out of range: " + prefix + "values");
        }
        v_max = std::max(v_max, v);
        const double ctr = b.ctrs(r, c);
        if (!(ctr >= 0.0 && ctr <= 1.0)) {
          throw ScenarioError(ScenarioErrc::CtrOutOfRange,
                              "CTR out of range: " + prefix + "ctrs");
        }
      }
    }
  }

  if (desc.bid_grid.empty()) {
    throw ScenarioError(ScenarioErrc::BidGridNotIncreasing,
                        "bid grid not increasing: bid_grid is empty");
  }
  if (!(desc.bid_grid.front() >= 0.0)) {
    throw ScenarioError(ScenarioErrc::BidGridNotIncreasing,
                        "bid grid not increasing: first bid is negative");
  }
  for (std::size_t k = 1; k < desc.bid_grid.size(); ++k) {
    if (!(desc.bid_grid[k] > desc.bid_grid[k - 1]) ||
        !std::isfinite(desc.bid_grid[k])) {
      throw ScenarioError(ScenarioErrc::BidGridNotIncreasing,
                          "bid grid not increasing: at index " +
                              std::to_string(k));
    }
  }
  if (!(desc.bid_grid.back() > 0.0)) {
    throw ScenarioError(ScenarioErrc::BidGridNotIncreasing,
                        "bid grid not increasing: b_max must be positive");
  }

  if (desc.clauses.empty()) {
    throw ScenarioError(ScenarioErrc::EmptyClauseSpace,
                        "empty clause space: clauses");
  }
  const ClauseMask all = (ClauseMask{1} << num_queries) - 1;
  for (ClauseMask c : desc.clauses) {
    if ((c & ~all) != 0) {
      throw ScenarioError(ScenarioErrc::InvalidClause,
                          "invalid clause: mask " + std::to_string(c) +
                              " names an unknown query");
    }
  }

  const auto& m = desc.mechanism;
  if (!std::isfinite(m.floor) || m.floor < 0.0) {
    throw ScenarioError(ScenarioErrc::InvalidParameter,
                        "invalid parameter: mechanism.floor must be >= 0");
  }
  const auto& l = desc.learner;
  if (!l.optimal_tuning && !(l.eta > 0.0 && std::isfinite(l.eta))) {
    throw ScenarioError(ScenarioErrc::InvalidParameter,
                        "invalid parameter: learner.eta must be > 0");
  }
  if (!(l.gamma >= 0.0) || !std::isfinite(l.gamma)) {
    throw ScenarioError(ScenarioErrc::InvalidParameter,
                        "invalid parameter: learner.gamma must be >= 0");
  }
  if (desc.horizon < 1) {
    throw ScenarioError(ScenarioErrc::InvalidParameter,
                        "invalid parameter: horizon must be >= 1");
  }
  if (!(desc.window_fraction > 0.0 && desc.window_fraction <= 1.0)) {
    throw ScenarioError(ScenarioErrc::InvalidParameter,
                        "invalid parameter: window_fraction must be in (0, 1]");
  }

  Scenario s;
  s.v_max_ = v_max;
  s.window_length_ = std::clamp<std::int64_t>(
      std::llround(static_cast<double>(desc.horizon) * desc.window_fraction),
      1, desc.horizon);
  s.desc_ = std::move(desc);
  return s;
}

Scenario Scenario::with_mechanism(const MechanismSpec& m) const {
  ScenarioDesc copy = desc_;
  copy.mechanism = m;
  return validate_scenario(std::move(copy));
}

std::vector<Action> action_space(const Scenario& scenario) {
  std::vector<Action> actions;
  actions.reserve(scenario.num_actions());
  for (std::uint32_t c = 0; c < scenario.num_clauses(); ++c) {
    for (std::uint32_t b = 0; b < scenario.num_bids(); ++b) {
      actions.push_back({b, c});
    }
  }
  return actions;
}

std::vector<ClauseMask> all_clauses(std::size_t num_queries) {
  std::vector<ClauseMask> out;
  const ClauseMask count = ClauseMask{1} << num_queries;
  for (ClauseMask c = 0; c < count; ++c) out.push_back(c);
  return out;
}

std::vector<ClauseMask> full_clause(std::size_t num_queries) {
  return {(ClauseMask{1} << num_queries) - 1};
}

std::vector<double> fraction_grid(int max_index, int denominator) {
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(max_index) + 1);
  for (int k = 0; k <= max_index; ++k) {
    grid.push_back(static_cast<double>(k) / static_cast<double>(denominator));
  }
  return grid;
}

EnvSequence sample_env_sequence(const Scenario& scenario) {
  const auto horizon = static_cast<std::size_t>(scenario.horizon());
  const std::size_t n = scenario.num_bidders();
  EnvSequence env;
  env.num_bidders = n;
  env.queries.resize(horizon);
  env.types.resize(horizon * n);

  std::vector<std::vector<double>> type_probs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& dist = scenario.desc().bidders[i].type_dist;
    type_probs[i].assign(dist.data(), dist.data() + dist.size());
  }
  const auto& qd = scenario.query_dist();
  const std::vector<double> query_probs(qd.data(), qd.data() + qd.size());

  Rng rng(scenario.desc().env_seed);
  for (std::size_t t = 0; t < horizon; ++t) {
    env.queries[t] = static_cast<QueryIndex>(rng.categorical(query_probs));
    for (std::size_t i = 0; i < n; ++i) {
      env.types[t * n + i] =
          static_cast<TypeIndex>(rng.categorical(type_probs[i]));
    }
  }
  return env;
}

}  // namespace adsim
