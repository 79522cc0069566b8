#include "adsim/mechanism.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <string>

namespace adsim {

namespace {

std::atomic<std::uint64_t> g_clamp_count{0};

bool targets(ClauseMask clause, std::size_t q) {
  return ((clause >> q) & 1U) != 0;
}

double tie_divisor(std::size_t tie_size, std::size_t num_bidders,
                   TiePolicy policy) {
  if (tie_size <= 1) return 1.0;
  return policy == TiePolicy::DivideByN ? static_cast<double>(num_bidders)
                                        : static_cast<double>(tie_size);
}

// Runner-up's contribution to the winner's second price. `runner_score` is
// the best competing score; `runner_bid`/`runner_ctr` belong to the
// highest-bidding competitor at that score.
double second_price(PriceSpace space, double winner_bid, double winner_ctr,
                    double runner_score, double runner_bid, double runner_ctr) {
  if (!(runner_score > 0.0)) return 0.0;
  double p = runner_bid;
  if (space == PriceSpace::ScoreSpace && runner_ctr != winner_ctr) {
    p = runner_score / winner_ctr;
  }
  return std::min(p, winner_bid);
}

void check_inputs(const Scenario& scenario, std::size_t q,
                  std::span<const TypeIndex> types,
                  std::span<const Action> actions) {
  const std::size_t n = scenario.num_bidders();
  if (q >= scenario.num_queries()) {
    throw std::invalid_argument("query index out of range: " +
                                std::to_string(q));
  }
  if (types.size() != n || actions.size() != n) {
    throw std::invalid_argument("expected one type and one action per bidder");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (types[i] >= scenario.num_types(i) ||
        actions[i].bid_index >= scenario.num_bids() ||
        actions[i].clause_index >= scenario.num_clauses()) {
      throw std::invalid_argument("type or action index out of range for bidder " +
                                  std::to_string(i));
    }
  }
}

}  // namespace

std::optional<double> AuctionOutcome::price_for(std::size_t bidder) const {
  for (std::size_t k = 0; k < tied_winners.size(); ++k) {
    if (tied_winners[k] == bidder) return tied_prices[k];
  }
  return std::nullopt;
}

void AuctionOutcome::clear() {
  winner.reset();
  price_per_click = 0.0;
  tied_winners.clear();
  tied_prices.clear();
  eligible.clear();
  tie_divisor = 1.0;
}

std::optional<double> rule_price(const MechanismSpec& mech, double winner_bid,
                                 double second) {
  switch (mech.rule) {
    case PriceRule::FirstPrice:
      return winner_bid;
    case PriceRule::SecondPrice:
      return second;
    case PriceRule::HardReserve:
      if (winner_bid < mech.floor) return std::nullopt;
      return std::max(second, mech.floor);
    case PriceRule::SoftFloor:
      if (second >= mech.floor) return second;
      if (winner_bid >= mech.floor) return mech.floor;
      return winner_bid;
  }
  return std::nullopt;
}

AuctionOutcome resolve_auction(const Scenario& scenario, std::size_t q,
                               std::span<const TypeIndex> types,
                               std::span<const Action> actions,
                               const MechanismSpec& mech) {
  AuctionOutcome out;
  resolve_auction_into(scenario, q, types, actions, mech, out);
  return out;
}

void resolve_auction_into(const Scenario& scenario, std::size_t q,
                          std::span<const TypeIndex> types,
                          std::span<const Action> actions,
                          const MechanismSpec& mech, AuctionOutcome& out) {
  check_inputs(scenario, q, types, actions);
  out.clear();
  const std::size_t n = scenario.num_bidders();

  auto bid_of = [&](std::size_t i) {
    return scenario.bid(actions[i].bid_index);
  };
  auto ctr_of = [&](std::size_t i) { return scenario.ctr(i, types[i], q); };
  auto score_of = [&](std::size_t i) { return bid_of(i) * ctr_of(i); };

  double top = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (targets(scenario.clause(actions[i].clause_index), q)) {
      out.eligible.push_back(i);
      top = std::max(top, score_of(i));
    }
  }
  if (out.eligible.empty()) return;

  if (top == 0.0) {
    // Every eligible score is zero: all eligible bidders tie at price 0.
    if (mech.rule == PriceRule::HardReserve && mech.floor > 0.0) return;
    out.tie_divisor = tie_divisor(out.eligible.size(), n, mech.tie_policy);
    out.tied_winners = out.eligible;
    out.tied_prices.assign(out.eligible.size(), 0.0);
  } else {
    std::size_t tie_size = 0;
    for (std::size_t i : out.eligible) {
      if (score_of(i) == top) ++tie_size;
    }
    out.tie_divisor = tie_divisor(tie_size, n, mech.tie_policy);
    for (std::size_t w : out.eligible) {
      if (score_of(w) != top) continue;
      double runner_score = -1.0;
      double runner_bid = 0.0;
      double runner_ctr = 0.0;
      for (std::size_t j : out.eligible) {
        if (j == w) continue;
        const double s = score_of(j);
        if (s > runner_score || (s == runner_score && bid_of(j) > runner_bid)) {
          runner_score = s;
          runner_bid = bid_of(j);
          runner_ctr = ctr_of(j);
        }
      }
      const double second = second_price(mech.price_space, bid_of(w), ctr_of(w),
                                         runner_score, runner_bid, runner_ctr);
      if (auto price = rule_price(mech, bid_of(w), second)) {
        out.tied_winners.push_back(w);
        out.tied_prices.push_back(*price);
      }
    }
  }
  if (!out.tied_winners.empty()) {
    out.winner = out.tied_winners.front();
    out.price_per_click = out.tied_prices.front();
  }
}

double reward(const AuctionOutcome& outcome, std::size_t bidder,
              std::size_t type, std::size_t q, const Scenario& scenario) {
  const auto price = outcome.price_for(bidder);
  if (!price) return 0.0;
  return scenario.ctr(bidder, type, q) *
         (scenario.value(bidder, type, q) - *price) / outcome.tie_divisor;
}

double normalize_reward(double eu, double v_max, double b_max) {
  if (eu < -b_max || eu > v_max) {
    g_clamp_count.fetch_add(1, std::memory_order_relaxed);
    eu = std::clamp(eu, -b_max, v_max);
  }
  return (eu + b_max) / (v_max + b_max);
}

std::uint64_t normalization_clamp_count() {
  return g_clamp_count.load(std::memory_order_relaxed);
}

void reset_normalization_clamp_count() { g_clamp_count.store(0); }

void counterfactual_utilities(const Scenario& scenario, std::size_t q,
                              std::span<const TypeIndex> types,
                              std::span<const Action> actions,
                              const MechanismSpec& mech, std::size_t bidder,
                              Eigen::Ref<Eigen::ArrayXd> out) {
  const std::size_t n = scenario.num_bidders();
  const std::size_t num_bids = scenario.num_bids();

  // Summary of the competition facing `bidder`.
  double best = -1.0;
  double best_bid = 0.0;
  double best_ctr = 0.0;
  std::size_t best_count = 0;
  std::size_t eligible_others = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == bidder) continue;
    if (!targets(scenario.clause(actions[j].clause_index), q)) continue;
    ++eligible_others;
    const double b = scenario.bid(actions[j].bid_index);
    const double c = scenario.ctr(j, types[j], q);
    const double s = b * c;
    if (s > best) {
      best = s;
      best_bid = b;
      best_ctr = c;
      best_count = 1;
    } else if (s == best) {
      ++best_count;
      if (b > best_bid) {
        best_bid = b;
        best_ctr = c;
      }
    }
  }

  const std::size_t type = types[bidder];
  const double ctr = scenario.ctr(bidder, type, q);
  const double value = scenario.value(bidder, type, q);
  const bool reserve_blocks_zero =
      mech.rule == PriceRule::HardReserve && mech.floor > 0.0;

  for (std::size_t c = 0; c < scenario.num_clauses(); ++c) {
    const auto base = static_cast<Eigen::Index>(c * num_bids);
    if (!targets(scenario.clause(c), q)) {
      out.segment(base, static_cast<Eigen::Index>(num_bids)).setZero();
      continue;
    }
    for (std::size_t k = 0; k < num_bids; ++k) {
      const double b = scenario.bid(k);
      const double s = b * ctr;
      double eu = 0.0;
      if (s == 0.0 && !(best > 0.0)) {
        if (!reserve_blocks_zero) {
          eu = ctr * value /
               tie_divisor(eligible_others + 1, n, mech.tie_policy);
        }
      } else if (s >= best) {
        const std::size_t tie_size = s == best ? best_count + 1 : 1;
        const double second =
            second_price(mech.price_space, b, ctr, best, best_bid, best_ctr);
        if (auto price = rule_price(mech, b, second)) {
          eu = ctr * (value - *price) /
               tie_divisor(tie_size, n, mech.tie_policy);
        }
      }
      out[base + static_cast<Eigen::Index>(k)] = eu;
    }
  }
}

Eigen::ArrayXd counterfactual_rewards(const Scenario& scenario, std::size_t q,
                                      std::span<const TypeIndex> types,
                                      std::span<const Action> actions,
                                      const MechanismSpec& mech,
                                      std::size_t bidder) {
  check_inputs(scenario, q, types, actions);
  if (bidder >= scenario.num_bidders()) {
    throw std::invalid_argument("bidder index out of range");
  }
  Eigen::ArrayXd eu(static_cast<Eigen::Index>(scenario.num_actions()));
  counterfactual_utilities(scenario, q, types, actions, mech, bidder, eu);
  const double v_max = scenario.v_max();
  const double b_max = scenario.b_max();
  return eu.unaryExpr(
      [&](double x) { return normalize_reward(x, v_max, b_max); });
}

}  // namespace adsim
