#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "adsim/scenario.hpp"

namespace adsim {

/// Result of one auction period.
///
/// `tied_winners` holds every top-score bidder that is actually sold the slot
/// (a hard reserve can reject a tied bidder whose own bid is below it), with
/// the per-click price each would pay in `tied_prices`. `winner` is the
/// lowest-index tied winner; the simulator re-draws it uniformly when it
/// records revenue. `tie_divisor` is the share applied to a tied bidder's
/// surplus: 1 for a unique winner, N or the tie size under the tie policy.
struct AuctionOutcome {
  std::optional<std::size_t> winner;
  double price_per_click = 0.0;
  std::vector<std::size_t> tied_winners;
  std::vector<double> tied_prices;
  std::vector<std::size_t> eligible;
  double tie_divisor = 1.0;

  bool sold() const { return winner.has_value(); }
  /// Price charged to `bidder` if it is among the tied winners.
  std::optional<double> price_for(std::size_t bidder) const;
  void clear();
};

/// Price under `mech` for a winner bidding `winner_bid` whose runner-up
/// price is `second_price`; nullopt when a hard reserve leaves the slot unsold.
std::optional<double> rule_price(const MechanismSpec& mech, double winner_bid,
                                 double second_price);

/// Resolves one period: eligibility by clause, ranking by bid x CTR, price
/// by rule. Throws std::invalid_argument on out-of-range indices.
AuctionOutcome resolve_auction(const Scenario& scenario, std::size_t q,
                               std::span<const TypeIndex> types,
                               std::span<const Action> actions,
                               const MechanismSpec& mech);

/// Same as resolve_auction but reuses `out`'s storage.
void resolve_auction_into(const Scenario& scenario, std::size_t q,
                          std::span<const TypeIndex> types,
                          std::span<const Action> actions,
                          const MechanismSpec& mech, AuctionOutcome& out);

/// Expected utility CTR * (V - p) / tie_divisor for a winner, 0 otherwise.
double reward(const AuctionOutcome& outcome, std::size_t bidder,
              std::size_t type, std::size_t q, const Scenario& scenario);

/// Affine map of expected utility in [-b_max, v_max] onto [0, 1]. Inputs
/// outside the bracket are clamped and counted.
double normalize_reward(double eu, double v_max, double b_max);

/// Number of clamps performed by normalize_reward in this process.
std::uint64_t normalization_clamp_count();
void reset_normalization_clamp_count();

/// Expected utility `bidder` would have received for every action in A
/// (clause-major order) with the other bidders' actions held fixed.
/// Runs in O(N + |A|) using a summary of the competing scores.
void counterfactual_utilities(const Scenario& scenario, std::size_t q,
                              std::span<const TypeIndex> types,
                              std::span<const Action> actions,
                              const MechanismSpec& mech, std::size_t bidder,
                              Eigen::Ref<Eigen::ArrayXd> out);

/// counterfactual_utilities passed through normalize_reward.
Eigen::ArrayXd counterfactual_rewards(const Scenario& scenario, std::size_t q,
                                      std::span<const TypeIndex> types,
                                      std::span<const Action> actions,
                                      const MechanismSpec& mech,
                                      std::size_t bidder);

}  // namespace adsim
