#include "adsim/learners.hpp"

#include <cmath>
#include <stdexcept>

namespace adsim {

LearnerState::LearnerState(Algorithm algo, double eta_, double gamma_,
                           const std::vector<std::size_t>& types_per_bidder,
                           std::size_t num_actions)
    : algorithm(algo), eta(eta_), gamma(gamma_) {
  tables.reserve(types_per_bidder.size());
  for (std::size_t types : types_per_bidder) {
    tables.push_back(LearnerTable::Zero(static_cast<Eigen::Index>(types),
                                        static_cast<Eigen::Index>(num_actions)));
  }
}

LearnerState make_learner_state(const Scenario& scenario) {
  const auto& spec = scenario.learner();
  double eta = spec.eta;
  double gamma = spec.gamma;
  if (spec.algorithm == Algorithm::Exp3IX && spec.optimal_tuning) {
    const auto tuned = exp3ix_tuning(scenario.num_actions(), scenario.horizon());
    eta = tuned.eta;
    gamma = tuned.gamma;
  }
  std::vector<std::size_t> types(scenario.num_bidders());
  for (std::size_t i = 0; i < types.size(); ++i) types[i] = scenario.num_types(i);
  return LearnerState(spec.algorithm, eta, gamma, types, scenario.num_actions());
}

Exp3IxParams exp3ix_tuning(std::size_t num_actions, std::int64_t horizon) {
  if (num_actions < 2 || horizon < 1) {
    throw std::invalid_argument("exp3ix_tuning requires K >= 2 and T >= 1");
  }
  const double k = static_cast<double>(num_actions);
  const double t = static_cast<double>(horizon);
  const double gamma = std::sqrt(2.0 * std::log(k + 1.0) / (k * t));
  return {2.0 * gamma, gamma};
}

void hedge_distribution(const Eigen::Ref<const Eigen::ArrayXd>& weights,
                        double eta, Eigen::Ref<Eigen::ArrayXd> probs) {
  const double top = weights.maxCoeff();
  probs = ((weights - top) / eta).exp();
  probs /= probs.sum();
}

Eigen::ArrayXd hedge_distribution(const Eigen::Ref<const Eigen::ArrayXd>& weights,
                                  double eta) {
  Eigen::ArrayXd probs(weights.size());
  hedge_distribution(weights, eta, probs);
  return probs;
}

void exp3ix_distribution(const Eigen::Ref<const Eigen::ArrayXd>& losses,
                         double eta, Eigen::Ref<Eigen::ArrayXd> probs) {
  const double bottom = losses.minCoeff();
  probs = (-eta * (losses - bottom)).exp();
  probs /= probs.sum();
}

Eigen::ArrayXd exp3ix_distribution(const Eigen::Ref<const Eigen::ArrayXd>& losses,
                                   double eta) {
  Eigen::ArrayXd probs(losses.size());
  exp3ix_distribution(losses, eta, probs);
  return probs;
}

void hedge_update(LearnerState& state, std::size_t bidder, std::size_t type,
                  const Eigen::Ref<const Eigen::ArrayXd>& rewards) {
  if ((rewards < 0.0).any() || (rewards > 1.0).any()) {
    throw std::invalid_argument("hedge_update: reward outside [0, 1]");
  }
  hedge_accumulate(state, bidder, type, rewards);
}

void hedge_accumulate(LearnerState& state, std::size_t bidder,
                      std::size_t type,
                      const Eigen::Ref<const Eigen::ArrayXd>& rewards) {
  state.row(bidder, type) += rewards.transpose();
}

void exp3ix_update(LearnerState& state, std::size_t bidder, std::size_t type,
                   std::size_t chosen_action, double normalized_reward,
                   double prob_of_chosen) {
  if (!(normalized_reward >= 0.0 && normalized_reward <= 1.0)) {
    throw std::invalid_argument("exp3ix_update: reward outside [0, 1]");
  }
  if (!(prob_of_chosen > 0.0 && prob_of_chosen <= 1.0)) {
    throw std::invalid_argument("exp3ix_update: probability outside (0, 1]");
  }
  state.tables[bidder](static_cast<Eigen::Index>(type),
                       static_cast<Eigen::Index>(chosen_action)) +=
      (1.0 - normalized_reward) / (prob_of_chosen + state.gamma);
}

}  // namespace adsim
