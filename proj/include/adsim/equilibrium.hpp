#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "adsim/scenario.hpp"
#include "adsim/simulator.hpp"

namespace adsim {

/// Weighted joint (type vector, action vector) samples. Each trace period
/// contributes one sample of equal weight.
class EmpiricalProfile {
 public:
  explicit EmpiricalProfile(std::size_t num_bidders) : num_bidders_(num_bidders) {}

  /// Samples from one or more window traces of the same scenario.
  static EmpiricalProfile from_traces(const std::vector<const PeriodTrace*>& traces);

  void add(std::span<const TypeIndex> types, std::span<const std::uint32_t> actions,
           double weight = 1.0);

  std::size_t num_bidders() const { return num_bidders_; }
  std::size_t size() const { return weights_.size(); }
  bool empty() const { return weights_.empty(); }
  std::span<const TypeIndex> types(std::size_t k) const {
    return {types_.data() + k * num_bidders_, num_bidders_};
  }
  std::span<const std::uint32_t> actions(std::size_t k) const {
    return {actions_.data() + k * num_bidders_, num_bidders_};
  }
  double weight(std::size_t k) const { return weights_[k]; }

 private:
  std::size_t num_bidders_;
  std::vector<TypeIndex> types_;
  std::vector<std::uint32_t> actions_;
  std::vector<double> weights_;
};

struct DeviationGain {
  std::size_t bidder = 0;
  std::size_t type = 0;
  /// Best fixed deviation (flattened action index).
  std::size_t best_action = 0;
  double gain = 0.0;
  /// Total sample weight of periods where this type was realized.
  double weight = 0.0;
  bool realized = false;
};

struct BceReport {
  std::vector<DeviationGain> gains;  // bidder-major, then type
  double epsilon = 0.0;              // max(0, raw_max_gain)
  double raw_max_gain = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> unrealized;
};

/// Largest expected gain any (bidder, type) could obtain by switching to a
/// single fixed action, with the others' realized actions held fixed.
/// Utilities are exact expectations over the query distribution, with ties
/// shared by the tied bidders. Unrealized types are excluded and listed.
/// Throws std::invalid_argument on an empty profile or when |A| > action_cap.
BceReport coarse_bce_epsilon(const EmpiricalProfile& profile,
                             const Scenario& scenario,
                             std::size_t action_cap = 4096);

/// External regret of `bidder`'s realized actions while holding `type`,
/// against the best fixed action in hindsight, in normalized reward units
/// per 1000 such periods. Throws std::runtime_error if no trace was kept.
double realized_regret(const std::optional<PeriodTrace>& trace,
                       const Scenario& scenario, std::size_t bidder,
                       std::size_t type);

}  // namespace adsim
