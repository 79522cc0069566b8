#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace adsim {

using ClauseMask = std::uint32_t;
using TypeIndex = std::uint16_t;
using QueryIndex = std::uint16_t;

/// Row-major matrix: rows are types, columns are queries.
using TypeQueryTable =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class PriceRule { FirstPrice, SecondPrice, HardReserve, SoftFloor };
enum class TiePolicy { DivideByN, DivideByTied };

/// How the runner-up sets the second price when CTRs differ.
///   BidSpace:   runner-up's per-click bid (capped at the winner's bid).
///   ScoreSpace: runner-up's score divided by the winner's CTR (GSP).
enum class PriceSpace { BidSpace, ScoreSpace };

struct MechanismSpec {
  PriceRule rule = PriceRule::SecondPrice;
  double floor = 0.0;  // reserve r or soft floor s; ignored otherwise
  TiePolicy tie_policy = TiePolicy::DivideByN;
  PriceSpace price_space = PriceSpace::BidSpace;

  static MechanismSpec first_price() { return {PriceRule::FirstPrice}; }
  static MechanismSpec second_price() { return {PriceRule::SecondPrice}; }
  static MechanismSpec hard_reserve(double r) {
    return {PriceRule::HardReserve, r};
  }
  static MechanismSpec soft_floor(double s) {
    return {PriceRule::SoftFloor, s};
  }
};

/// Short label used in CSV output: first, second, reserve, soft.
std::string mechanism_kind(const MechanismSpec& m);
/// Parses "first", "second", "reserve:R", "soft:S".
MechanismSpec parse_mechanism(const std::string& text);

enum class Algorithm { Hedge, Exp3IX };

struct LearnerSpec {
  Algorithm algorithm = Algorithm::Hedge;
  double eta = 0.02;
  double gamma = 0.0;
  /// EXP3-IX only: derive (eta, gamma) from |A| and the horizon.
  bool optimal_tuning = false;
  /// Hedge only: accumulate raw expected utility instead of normalized reward.
  bool hedge_raw_rewards = false;
};

struct BidderSpec {
  std::vector<std::string> types;
  Eigen::VectorXd type_dist;
  TypeQueryTable values;
  TypeQueryTable ctrs;
};

/// Unvalidated scenario contents, as read from a configuration file.
struct ScenarioDesc {
  std::string id = "scenario";
  std::vector<std::string> queries;
  Eigen::VectorXd query_dist;
  std::vector<BidderSpec> bidders;
  std::vector<double> bid_grid;
  std::vector<ClauseMask> clauses;
  MechanismSpec mechanism;
  LearnerSpec learner;
  std::int64_t horizon = 0;
  double window_fraction = 0.10;
  std::uint64_t env_seed = 0;
  std::vector<std::uint64_t> run_seeds;
};

enum class ScenarioErrc {
  NotNormalized,
  CtrOutOfRange,
  EmptyClauseSpace,
  BidGridNotIncreasing,
  NegativeValue,
  InvalidClause,
  ShapeMismatch,
  InvalidParameter,
};

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(ScenarioErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ScenarioErrc code() const noexcept { return code_; }

 private:
  ScenarioErrc code_;
};

/// A (bid, targeting clause) pair on the discrete action grid.
struct Action {
  std::uint32_t bid_index = 0;
  std::uint32_t clause_index = 0;
  friend bool operator==(const Action&, const Action&) = default;
};

class Scenario;
Scenario validate_scenario(ScenarioDesc desc);

/// Validated, immutable auction environment plus learner and horizon.
class Scenario {
 public:
  const ScenarioDesc& desc() const { return desc_; }
  const std::string& id() const { return desc_.id; }

  std::size_t num_bidders() const { return desc_.bidders.size(); }
  std::size_t num_queries() const { return desc_.queries.size(); }
  std::size_t num_types(std::size_t bidder) const {
    return desc_.bidders[bidder].types.size();
  }
  std::size_t num_bids() const { return desc_.bid_grid.size(); }
  std::size_t num_clauses() const { return desc_.clauses.size(); }
  std::size_t num_actions() const { return num_bids() * num_clauses(); }

  double value(std::size_t bidder, std::size_t type, std::size_t q) const {
    return desc_.bidders[bidder].values(type, q);
  }
  double ctr(std::size_t bidder, std::size_t type, std::size_t q) const {
    return desc_.bidders[bidder].ctrs(type, q);
  }
  double bid(std::size_t k) const { return desc_.bid_grid[k]; }
  ClauseMask clause(std::size_t c) const { return desc_.clauses[c]; }
  const Eigen::VectorXd& query_dist() const { return desc_.query_dist; }

  /// Clause-major flattening: index = clause * |B| + bid.
  std::size_t action_index(const Action& a) const {
    return a.clause_index * num_bids() + a.bid_index;
  }
  Action action_at(std::size_t index) const {
    return {static_cast<std::uint32_t>(index % num_bids()),
            static_cast<std::uint32_t>(index / num_bids())};
  }

  const MechanismSpec& mechanism() const { return desc_.mechanism; }
  const LearnerSpec& learner() const { return desc_.learner; }
  std::int64_t horizon() const { return desc_.horizon; }
  std::int64_t window_length() const { return window_length_; }
  std::int64_t window_start() const { return desc_.horizon - window_length_; }

  double v_max() const { return v_max_; }
  double b_max() const { return desc_.bid_grid.back(); }

  /// Copy with a different pricing rule (re-validated).
  Scenario with_mechanism(const MechanismSpec& m) const;

 private:
  friend Scenario validate_scenario(ScenarioDesc desc);
  Scenario() = default;

  ScenarioDesc desc_;
  double v_max_ = 0.0;
  std::int64_t window_length_ = 0;
};

/// All actions in deterministic clause-major order.
std::vector<Action> action_space(const Scenario& scenario);

/// Every subset of `num_queries` queries, in increasing mask order
/// (the empty clause first).
std::vector<ClauseMask> all_clauses(std::size_t num_queries);
/// Only the clause containing every query.
std::vector<ClauseMask> full_clause(std::size_t num_queries);

/// Bid grid {k / denominator : k = 0..max_index}. Built by division so that
/// grid points compare equal to decimal literals such as 0.65.
std::vector<double> fraction_grid(int max_index, int denominator);

/// Realized query and type draws for every period. Identical for all runs
/// of a scenario; only learner sampling varies by run.
struct EnvSequence {
  std::size_t num_bidders = 0;
  std::vector<QueryIndex> queries;  // length T
  std::vector<TypeIndex> types;     // T x N, row-major

  std::size_t length() const { return queries.size(); }
  QueryIndex query(std::size_t t) const { return queries[t]; }
  const TypeIndex* types_at(std::size_t t) const {
    return types.data() + t * num_bidders;
  }
};

/// Draws q ~ F_Q then tau_i ~ F_i for i = 0..N-1 in each period, from a
/// generator seeded with the scenario's env_seed.
EnvSequence sample_env_sequence(const Scenario& scenario);

}  // namespace adsim
