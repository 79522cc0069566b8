#include "adsim/equilibrium.hpp"

#include <limits>
#include <stdexcept>

#include "adsim/mechanism.hpp"

namespace adsim {

EmpiricalProfile EmpiricalProfile::from_traces(
    const std::vector<const PeriodTrace*>& traces) {
  if (traces.empty()) throw std::invalid_argument("no traces given");
  EmpiricalProfile profile(traces.front()->num_bidders);
  for (const PeriodTrace* tr : traces) {
    if (tr->num_bidders != profile.num_bidders_) {
      throw std::invalid_argument("traces disagree on number of bidders");
    }
    const std::size_t n = tr->num_bidders;
    for (std::size_t k = 0; k < tr->size(); ++k) {
      profile.add({tr->types.data() + k * n, n}, {tr->actions.data() + k * n, n});
    }
  }
  return profile;
}

void EmpiricalProfile::add(std::span<const TypeIndex> types,
                           std::span<const std::uint32_t> actions, double weight) {
  if (types.size() != num_bidders_ || actions.size() != num_bidders_) {
    throw std::invalid_argument("sample size does not match number of bidders");
  }
  if (!(weight > 0.0)) throw std::invalid_argument("sample weight must be positive");
  types_.insert(types_.end(), types.begin(), types.end());
  actions_.insert(actions_.end(), actions.begin(), actions.end());
  weights_.push_back(weight);
}

BceReport coarse_bce_epsilon(const EmpiricalProfile& profile,
                             const Scenario& scenario, std::size_t action_cap) {
  if (profile.empty()) throw std::invalid_argument("empty profile");
  const std::size_t n = scenario.num_bidders();
  if (profile.num_bidders() != n) {
    throw std::invalid_argument("profile does not match scenario bidders");
  }
  const std::size_t num_actions = scenario.num_actions();
  if (num_actions > action_cap) {
    throw std::invalid_argument("action space exceeds cap of " +
                                std::to_string(action_cap));
  }
  MechanismSpec mech = scenario.mechanism();
  mech.tie_policy = TiePolicy::DivideByTied;

  // Accumulated deviation-minus-actual utility per (bidder, type, action).
  std::vector<Eigen::ArrayXXd> diff(n);
  std::vector<Eigen::ArrayXd> mass(n);
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = Eigen::ArrayXXd::Zero(static_cast<Eigen::Index>(num_actions),
                                    static_cast<Eigen::Index>(scenario.num_types(i)));
    mass[i] = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(scenario.num_types(i)));
  }

  const auto& fq = scenario.query_dist();
  std::vector<Action> actions(n);
  Eigen::ArrayXd cf(static_cast<Eigen::Index>(num_actions));
  Eigen::ArrayXd expected(static_cast<Eigen::Index>(num_actions));
  for (std::size_t k = 0; k < profile.size(); ++k) {
    const auto types = profile.types(k);
    const auto acts = profile.actions(k);
    for (std::size_t i = 0; i < n; ++i) {
      if (types[i] >= scenario.num_types(i) || acts[i] >= num_actions) {
        throw std::invalid_argument("profile sample outside scenario ranges");
      }
      actions[i] = scenario.action_at(acts[i]);
    }
    const double w = profile.weight(k);
    for (std::size_t i = 0; i < n; ++i) {
      expected.setZero();
      for (std::size_t q = 0; q < scenario.num_queries(); ++q) {
        const double pq = fq[static_cast<Eigen::Index>(q)];
        if (pq == 0.0) continue;
        counterfactual_utilities(scenario, q, types, actions, mech, i, cf);
        expected += pq * cf;
      }
      const double actual = expected[static_cast<Eigen::Index>(acts[i])];
      diff[i].col(types[i]) += w * (expected - actual);
      mass[i][types[i]] += w;
    }
  }

  BceReport report;
  report.raw_max_gain = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < scenario.num_types(i); ++t) {
      DeviationGain g;
      g.bidder = i;
      g.type = t;
      g.weight = mass[i][static_cast<Eigen::Index>(t)];
      g.realized = g.weight > 0.0;
      if (!g.realized) {
        report.unrealized.emplace_back(i, t);
        report.gains.push_back(g);
        continue;
      }
      Eigen::Index best = 0;
      const double top = diff[i].col(static_cast<Eigen::Index>(t)).maxCoeff(&best);
      g.best_action = static_cast<std::size_t>(best);
      g.gain = top / g.weight;
      report.raw_max_gain = std::max(report.raw_max_gain, g.gain);
      report.gains.push_back(g);
    }
  }
  report.epsilon = std::max(0.0, report.raw_max_gain);
  return report;
}

double realized_regret(const std::optional<PeriodTrace>& trace,
                       const Scenario& scenario, std::size_t bidder,
                       std::size_t type) {
  if (!trace) throw std::runtime_error("trace recording disabled");
  const std::size_t n = scenario.num_bidders();
  if (trace->num_bidders != n) {
    throw std::invalid_argument("trace does not match scenario bidders");
  }
  if (bidder >= n || type >= scenario.num_types(bidder)) {
    throw std::invalid_argument("bidder or type out of range");
  }
  const auto num_actions = static_cast<Eigen::Index>(scenario.num_actions());
  Eigen::ArrayXd cumulative = Eigen::ArrayXd::Zero(num_actions);
  double played = 0.0;
  std::size_t periods = 0;
  std::vector<Action> actions(n);
  for (std::size_t k = 0; k < trace->size(); ++k) {
    const std::span<const TypeIndex> types(trace->types.data() + k * n, n);
    if (types[bidder] != type) continue;
    for (std::size_t i = 0; i < n; ++i) {
      actions[i] = scenario.action_at(trace->actions[k * n + i]);
    }
    const Eigen::ArrayXd r = counterfactual_rewards(
        scenario, trace->queries[k], types, actions, scenario.mechanism(), bidder);
    cumulative += r;
    played += r[static_cast<Eigen::Index>(trace->actions[k * n + bidder])];
    ++periods;
  }
  if (periods == 0) return 0.0;
  return (cumulative.maxCoeff() - played) * 1000.0 / static_cast<double>(periods);
}

}  // namespace adsim
