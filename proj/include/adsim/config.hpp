#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "adsim/scenario.hpp"

namespace adsim {

/// Scenario documents are JSON objects:
///
///   id, queries, query_dist, horizon, window_fraction, env_seed, run_seeds
///   bidders: [ {types, type_dist, values, ctrs}, ... ]
///     or num_bidders + bidder: {...} for symmetric environments
///     values/ctrs are type x query arrays; a scalar ctrs fills the table
///   bid_grid: [b0, b1, ...] or {"max_index": K, "denominator": D}
///   clauses: "all" | "full" | [[query indices], ...]
///   mechanism: {rule: first|second|reserve|soft, floor, tie_policy:
///               divide_by_n|divide_by_tied, price_space: bid|score}
///   learner: {algorithm: hedge|exp3ix, eta, gamma, tuning: optimal,
///             raw_rewards}
///
/// Any structural problem is reported as a ScenarioError naming the field.
ScenarioDesc parse_scenario(const nlohmann::json& doc);

/// Reads and validates a scenario file. Throws IoError when the file cannot
/// be read or is not JSON, ScenarioError when validation fails.
Scenario load_scenario(const std::filesystem::path& path);

/// Inverse of parse_scenario for a validated scenario.
nlohmann::json scenario_to_json(const Scenario& scenario);

nlohmann::json mechanism_to_json(const MechanismSpec& m);

}  // namespace adsim
