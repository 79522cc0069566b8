#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "adsim/scenario.hpp"

namespace adsim {

/// Row-major so that one (bidder, type) row is contiguous.
using LearnerTable =
    Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-(bidder, type) learner tables over the flattened action space.
/// Hedge stores cumulative rewards; EXP3-IX stores cumulative estimated
/// losses. Both start at zero.
struct LearnerState {
  Algorithm algorithm = Algorithm::Hedge;
  double eta = 0.0;
  double gamma = 0.0;
  std::vector<LearnerTable> tables;  // one per bidder, types x |A|

  LearnerState(Algorithm algo, double eta_, double gamma_,
               const std::vector<std::size_t>& types_per_bidder,
               std::size_t num_actions);

  auto row(std::size_t bidder, std::size_t type) {
    return tables[bidder].row(static_cast<Eigen::Index>(type));
  }
  auto row(std::size_t bidder, std::size_t type) const {
    return tables[bidder].row(static_cast<Eigen::Index>(type));
  }
};

/// Fresh state for a scenario, with EXP3-IX tuning resolved.
LearnerState make_learner_state(const Scenario& scenario);

struct Exp3IxParams {
  double eta;
  double gamma;
};

/// gamma = sqrt(2 ln(K + 1) / (K T)), eta = 2 gamma.
Exp3IxParams exp3ix_tuning(std::size_t num_actions, std::int64_t horizon);

/// Softmax p(a) proportional to exp(w(a) / eta). The maximum weight is
/// subtracted before scaling, so adding a constant to every weight leaves
/// the output unchanged.
void hedge_distribution(const Eigen::Ref<const Eigen::ArrayXd>& weights,
                        double eta, Eigen::Ref<Eigen::ArrayXd> probs);
Eigen::ArrayXd hedge_distribution(const Eigen::Ref<const Eigen::ArrayXd>& weights,
                                  double eta);

/// p(a) proportional to exp(-eta * l(a)), stabilized by the minimum loss.
void exp3ix_distribution(const Eigen::Ref<const Eigen::ArrayXd>& losses,
                         double eta, Eigen::Ref<Eigen::ArrayXd> probs);
Eigen::ArrayXd exp3ix_distribution(const Eigen::Ref<const Eigen::ArrayXd>& losses,
                                   double eta);

/// Adds a full-information reward vector (entries in [0, 1]) to the
/// realized type's weights. Throws std::invalid_argument otherwise.
void hedge_update(LearnerState& state, std::size_t bidder, std::size_t type,
                  const Eigen::Ref<const Eigen::ArrayXd>& rewards);

/// Unchecked accumulation used when Hedge runs on raw expected utility.
void hedge_accumulate(LearnerState& state, std::size_t bidder,
                      std::size_t type,
                      const Eigen::Ref<const Eigen::ArrayXd>& rewards);

/// l(a_chosen) += (1 - r) / (p + gamma). Throws std::invalid_argument if
/// r is outside [0, 1] or p is outside (0, 1].
void exp3ix_update(LearnerState& state, std::size_t bidder, std::size_t type,
                   std::size_t chosen_action, double normalized_reward,
                   double prob_of_chosen);

}  // namespace adsim
