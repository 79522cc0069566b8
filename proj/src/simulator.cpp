#include "adsim/simulator.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <thread>

#include "adsim/learners.hpp"
#include "adsim/mechanism.hpp"
#include "adsim/rng.hpp"

namespace adsim {

BidHistogram::BidHistogram(const Scenario& scenario)
    : num_actions_(scenario.num_actions()) {
  std::size_t offset = 0;
  for (std::size_t i = 0; i < scenario.num_bidders(); ++i) {
    types_.push_back(scenario.num_types(i));
    offsets_.push_back(offset);
    offset += scenario.num_types(i) * num_actions_;
  }
  counts_.assign(offset, 0);
}

std::uint64_t BidHistogram::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::vector<double> BatchResult::revenues() const {
  std::vector<double> out;
  out.reserve(runs.size());
  for (const auto& r : runs) out.push_back(r.mean_revenue);
  return out;
}

std::pair<double, double> mean_and_stdev(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / n)};
}

std::size_t worker_count() {
  if (const char* env = std::getenv("ADSIM_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<std::size_t>(n);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

std::vector<std::uint64_t> batch_run_seeds(const Scenario& scenario,
                                           std::size_t num_runs,
                                           std::uint64_t master_seed) {
  const auto& given = scenario.desc().run_seeds;
  std::vector<std::uint64_t> seeds;
  for (std::size_t k = 0; k < num_runs; ++k) {
    seeds.push_back(k < given.size() ? given[k] : derive_seed(master_seed, k));
  }
  return seeds;
}

RunResult run_simulation(const Scenario& scenario, const EnvSequence& env,
                         std::uint64_t run_seed, const RunOptions& options) {
  const std::size_t n = scenario.num_bidders();
  const auto num_actions = static_cast<Eigen::Index>(scenario.num_actions());
  const auto horizon = static_cast<std::size_t>(scenario.horizon());
  if (env.length() != horizon || env.num_bidders != n) {
    throw std::invalid_argument("environment sequence does not match scenario");
  }
  const auto window_start = static_cast<std::size_t>(scenario.window_start());
  const MechanismSpec& mech = scenario.mechanism();
  const bool hedge = scenario.learner().algorithm == Algorithm::Hedge;
  const bool raw = hedge && scenario.learner().hedge_raw_rewards;
  const double v_max = scenario.v_max();
  const double b_max = scenario.b_max();

  LearnerState state = make_learner_state(scenario);
  Rng rng(run_seed);
  Rng record_rng(derive_seed(run_seed, 1));

  RunResult result;
  result.run_seed = run_seed;
  result.window_length = scenario.window_length();
  result.bid_histogram = BidHistogram(scenario);
  const bool trace_full = options.trace == TraceMode::Full;
  if (options.trace != TraceMode::None) {
    result.trace.emplace();
    result.trace->num_bidders = n;
  }

  std::vector<Action> actions(n);
  std::vector<std::size_t> chosen(n);
  std::vector<double> chosen_prob(n);
  Eigen::ArrayXd probs(num_actions);
  Eigen::ArrayXd cf(num_actions);
  AuctionOutcome outcome;
  double revenue = 0.0;

  for (std::size_t t = 0; t < horizon; ++t) {
    const std::size_t q = env.query(t);
    const std::span<const TypeIndex> types(env.types_at(t), n);
    const bool in_window = t >= window_start;

    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Map<const Eigen::ArrayXd> row(
          state.tables[i].row(types[i]).data(), num_actions);
      if (hedge) {
        hedge_distribution(row, state.eta, probs);
      } else {
        exp3ix_distribution(row, state.eta, probs);
      }
      const std::size_t a = rng.categorical(
          std::span<const double>(probs.data(), static_cast<std::size_t>(num_actions)));
      chosen[i] = a;
      chosen_prob[i] = probs[static_cast<Eigen::Index>(a)];
      actions[i] = scenario.action_at(a);
    }

    if (!hedge || in_window) {
      resolve_auction_into(scenario, q, types, actions, mech, outcome);
    }

    if (hedge) {
      for (std::size_t i = 0; i < n; ++i) {
        counterfactual_utilities(scenario, q, types, actions, mech, i, cf);
        if (!raw) {
          cf = cf.unaryExpr(
              [&](double eu) { return normalize_reward(eu, v_max, b_max); });
        }
        hedge_accumulate(state, i, types[i], cf);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const double r = normalize_reward(
            reward(outcome, i, types[i], q, scenario), v_max, b_max);
        exp3ix_update(state, i, types[i], chosen[i], r, chosen_prob[i]);
      }
    }

    if (in_window) {
      std::int32_t recorded = -1;
      double price = 0.0;
      if (outcome.sold()) {
        const std::size_t k = outcome.tied_winners.size();
        const std::size_t pick = k > 1 ? record_rng.below(k) : 0;
        const std::size_t w = outcome.tied_winners[pick];
        price = outcome.tied_prices[pick];
        recorded = static_cast<std::int32_t>(w);
        const double ctr = scenario.ctr(w, types[w], q);
        if (options.realized_clicks) {
          revenue += record_rng.bernoulli(ctr) ? price : 0.0;
        } else {
          revenue += ctr * price;
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        result.bid_histogram.add(i, types[i], chosen[i]);
      }
      if (result.trace && !trace_full) {
        auto& tr = *result.trace;
        tr.periods.push_back(static_cast<std::int64_t>(t));
        tr.queries.push_back(static_cast<QueryIndex>(q));
        tr.winners.push_back(recorded);
        tr.prices.push_back(price);
        for (std::size_t i = 0; i < n; ++i) {
          tr.types.push_back(types[i]);
          tr.actions.push_back(static_cast<std::uint32_t>(chosen[i]));
        }
      }
    }
    if (trace_full) {
      // Full traces record the realized winner without consuming the
      // recording stream, so window metrics are unaffected.
      auto& tr = *result.trace;
      if (!in_window) {
        resolve_auction_into(scenario, q, types, actions, mech, outcome);
      }
      tr.periods.push_back(static_cast<std::int64_t>(t));
      tr.queries.push_back(static_cast<QueryIndex>(q));
      tr.winners.push_back(outcome.sold()
                               ? static_cast<std::int32_t>(*outcome.winner)
                               : -1);
      tr.prices.push_back(outcome.price_per_click);
      for (std::size_t i = 0; i < n; ++i) {
        tr.types.push_back(types[i]);
        tr.actions.push_back(static_cast<std::uint32_t>(chosen[i]));
      }
    }
  }
  result.mean_revenue = revenue / static_cast<double>(scenario.window_length());
  return result;
}

BatchResult run_batch(const Scenario& scenario, const EnvSequence& env,
                      const std::vector<std::uint64_t>& run_seeds,
                      const RunOptions& options) {
  BatchResult batch;
  batch.runs.resize(run_seeds.size());
  const std::size_t workers = std::min(worker_count(), run_seeds.size());
  if (workers <= 1) {
    for (std::size_t k = 0; k < run_seeds.size(); ++k) {
      batch.runs[k] = run_simulation(scenario, env, run_seeds[k], options);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < run_seeds.size(); k = next++) {
          try {
            batch.runs[k] = run_simulation(scenario, env, run_seeds[k], options);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  std::tie(batch.mean, batch.stdev) = mean_and_stdev(batch.revenues());
  return batch;
}

BatchResult run_batch(const Scenario& scenario, std::size_t num_runs,
                      std::uint64_t master_seed, const RunOptions& options) {
  if (num_runs == 0) throw std::invalid_argument("num_runs must be >= 1");
  const EnvSequence env = sample_env_sequence(scenario);
  return run_batch(scenario, env, batch_run_seeds(scenario, num_runs, master_seed),
                   options);
}

std::vector<BatchResult> sweep(const Scenario& scenario_template,
                               SweepParameter parameter,
                               const std::vector<double>& values,
                               std::size_t num_runs, std::uint64_t master_seed,
                               const RunOptions& options) {
  if (num_runs == 0) throw std::invalid_argument("num_runs must be >= 1");
  const EnvSequence env = sample_env_sequence(scenario_template);
  const auto seeds = batch_run_seeds(scenario_template, num_runs, master_seed);
  std::vector<BatchResult> out;
  out.reserve(values.size());
  for (double v : values) {
    MechanismSpec m = scenario_template.mechanism();
    m.rule = parameter == SweepParameter::SoftFloor ? PriceRule::SoftFloor
                                                    : PriceRule::HardReserve;
    m.floor = v;
    out.push_back(run_batch(scenario_template.with_mechanism(m), env, seeds, options));
  }
  return out;
}

}  // namespace adsim
