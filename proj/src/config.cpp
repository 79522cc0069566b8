#include "adsim/config.hpp"

#include <fstream>

#include "adsim/io.hpp"

namespace adsim {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& problem) {
  throw ScenarioError(ScenarioErrc::InvalidParameter,
                      "invalid parameter: " + field + " " + problem);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ScenarioError(ScenarioErrc::InvalidParameter,
                        "missing field: " + where + key);
  }
  return obj.at(key);
}

Eigen::VectorXd to_vector(const json& arr, const std::string& field) {
  if (!arr.is_array()) fail(field, "must be an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t k = 0; k < arr.size(); ++k) {
    if (!arr[k].is_number()) fail(field, "must be an array of numbers");
    v[static_cast<Eigen::Index>(k)] = arr[k].get<double>();
  }
  return v;
}

TypeQueryTable to_table(const json& node, std::size_t rows, std::size_t cols,
                        const std::string& field) {
  TypeQueryTable t(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  if (node.is_number()) {
    t.setConstant(node.get<double>());
    return t;
  }
  if (!node.is_array() || node.size() != rows) {
    throw ScenarioError(ScenarioErrc::ShapeMismatch,
                        "shape mismatch: " + field + " must have one row per type");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = node[r];
    if (!row.is_array() || row.size() != cols) {
      throw ScenarioError(ScenarioErrc::ShapeMismatch,
                          "shape mismatch: " + field + " must have one column per query");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) fail(field, "must hold numbers");
      t(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          row[c].get<double>();
    }
  }
  return t;
}

BidderSpec parse_bidder(const json& node, std::size_t num_queries,
                        const std::string& where) {
  BidderSpec b;
  const auto& types = require(node, "types", where);
  if (!types.is_array()) fail(where + "types", "must be an array");
  for (const auto& t : types) {
    b.types.push_back(t.is_string() ? t.get<std::string>() : t.dump());
  }
  b.type_dist = to_vector(require(node, "type_dist", where), where + "type_dist");
  b.values = to_table(require(node, "values", where), b.types.size(), num_queries,
                      where + "values");
  b.ctrs = to_table(require(node, "ctrs", where), b.types.size(), num_queries,
                    where + "ctrs");
  return b;
}

MechanismSpec parse_mechanism_node(const json& node) {
  MechanismSpec m;
  const std::string rule = require(node, "rule", "mechanism.").get<std::string>();
  if (rule == "first") {
    m.rule = PriceRule::FirstPrice;
  } else if (rule == "second") {
    m.rule = PriceRule::SecondPrice;
  } else if (rule == "reserve") {
    m.rule = PriceRule::HardReserve;
    m.floor = require(node, "floor", "mechanism.").get<double>();
  } else if (rule == "soft") {
    m.rule = PriceRule::SoftFloor;
    m.floor = require(node, "floor", "mechanism.").get<double>();
  } else {
    fail("mechanism.rule", "must be first, second, reserve or soft");
  }
  const std::string tie = node.value("tie_policy", "divide_by_n");
  if (tie == "divide_by_n") {
    m.tie_policy = TiePolicy::DivideByN;
  } else if (tie == "divide_by_tied") {
    m.tie_policy = TiePolicy::DivideByTied;
  } else {
    fail("mechanism.tie_policy", "must be divide_by_n or divide_by_tied");
  }
  const std::string space = node.value("price_space", "bid");
  if (space == "bid") {
    m.price_space = PriceSpace::BidSpace;
  } else if (space == "score") {
    m.price_space = PriceSpace::ScoreSpace;
  } else {
    fail("mechanism.price_space", "must be bid or score");
  }
  return m;
}

LearnerSpec parse_learner(const json& node) {
  LearnerSpec l;
  const std::string algo = require(node, "algorithm", "learner.").get<std::string>();
  if (algo == "hedge") {
    l.algorithm = Algorithm::Hedge;
  } else if (algo == "exp3ix") {
    l.algorithm = Algorithm::Exp3IX;
  } else {
    fail("learner.algorithm", "must be hedge or exp3ix");
  }
  l.optimal_tuning = node.value("tuning", "") == "optimal";
  if (!l.optimal_tuning) l.eta = require(node, "eta", "learner.").get<double>();
  l.gamma = node.value("gamma", 0.0);
  l.hedge_raw_rewards = node.value("raw_rewards", false);
  return l;
}

std::vector<ClauseMask> parse_clauses(const json& node, std::size_t num_queries) {
  if (node.is_string()) {
    const auto s = node.get<std::string>();
    if (s == "all") return all_clauses(num_queries);
    if (s == "full") return full_clause(num_queries);
    fail("clauses", "must be \"all\", \"full\" or a list of query lists");
  }
  if (!node.is_array()) fail("clauses", "must be \"all\", \"full\" or a list");
  std::vector<ClauseMask> out;
  for (const auto& clause : node) {
    if (!clause.is_array()) fail("clauses", "entries must be lists of query indices");
    ClauseMask mask = 0;
    for (const auto& q : clause) {
      const auto idx = q.get<std::int64_t>();
      if (idx < 0 || idx >= 32) {
        throw ScenarioError(ScenarioErrc::InvalidClause,
                            "invalid clause: query index " + std::to_string(idx));
      }
      mask |= ClauseMask{1} << idx;
    }
    out.push_back(mask);
  }
  return out;
}

std::vector<double> parse_bid_grid(const json& node) {
  if (node.is_object()) {
    const int max_index = require(node, "max_index", "bid_grid.").get<int>();
    const int denominator = require(node, "denominator", "bid_grid.").get<int>();
    if (max_index < 0 || denominator <= 0) {
      fail("bid_grid", "needs max_index >= 0 and denominator > 0");
    }
    return fraction_grid(max_index, denominator);
  }
  const auto v = to_vector(node, "bid_grid");
  return {v.data(), v.data() + v.size()};
}

}  // namespace

ScenarioDesc parse_scenario(const json& doc) {
  try {
    if (!doc.is_object()) fail("scenario", "must be a JSON object");
    ScenarioDesc d;
    d.id = doc.value("id", "scenario");
    if (d.id.find_first_of(",\n\r") != std::string::npos) {
      fail("id", "must not contain commas or newlines");
    }
    for (const auto& q : require(doc, "queries", "")) {
      d.queries.push_back(q.is_string() ? q.get<std::string>() : q.dump());
    }
    d.query_dist = to_vector(require(doc, "query_dist", ""), "query_dist");
    const std::size_t nq = d.queries.size();

    if (doc.contains("bidders")) {
      const auto& arr = doc.at("bidders");
      if (!arr.is_array()) fail("bidders", "must be an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        d.bidders.push_back(
            parse_bidder(arr[i], nq, "bidders[" + std::to_string(i) + "]."));
      }
    } else {
      const auto n = require(doc, "num_bidders", "").get<std::int64_t>();
      if (n < 1) fail("num_bidders", "must be positive");
      const BidderSpec b = parse_bidder(require(doc, "bidder", ""), nq, "bidder.");
      d.bidders.assign(static_cast<std::size_t>(n), b);
    }
    if (doc.contains("num_bidders") && doc.contains("bidders") &&
        doc.at("num_bidders").get<std::size_t>() != d.bidders.size()) {
      throw ScenarioError(ScenarioErrc::ShapeMismatch,
                          "shape mismatch: num_bidders disagrees with bidders");
    }

    d.bid_grid = parse_bid_grid(require(doc, "bid_grid", ""));
    d.clauses = parse_clauses(doc.value("clauses", json("all")), nq);
    d.mechanism = parse_mechanism_node(require(doc, "mechanism", ""));
    d.learner = parse_learner(require(doc, "learner", ""));
    d.horizon = require(doc, "horizon", "").get<std::int64_t>();
    d.window_fraction = doc.value("window_fraction", 0.10);
    d.env_seed = doc.value("env_seed", std::uint64_t{0});
    if (doc.contains("run_seeds")) {
      d.run_seeds = doc.at("run_seeds").get<std::vector<std::uint64_t>>();
    }
    return d;
  } catch (const json::exception& e) {
    throw ScenarioError(ScenarioErrc::InvalidParameter,
                        std::string("invalid parameter: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("scenario is not valid JSON: " + path.string() + ": " + e.what());
  }
  return validate_scenario(parse_scenario(doc));
}

json mechanism_to_json(const MechanismSpec& m) {
  json j;
  j["rule"] = mechanism_kind(m);
  if (m.rule == PriceRule::HardReserve || m.rule == PriceRule::SoftFloor) {
    j["floor"] = m.floor;
  }
  j["tie_policy"] =
      m.tie_policy == TiePolicy::DivideByN ? "divide_by_n" : "divide_by_tied";
  j["price_space"] = m.price_space == PriceSpace::BidSpace ? "bid" : "score";
  return j;
}

json scenario_to_json(const Scenario& scenario) {
  const auto& d = scenario.desc();
  json doc;
  doc["id"] = d.id;
  doc["queries"] = d.queries;
  doc["query_dist"] = std::vector<double>(d.query_dist.data(),
                                          d.query_dist.data() + d.query_dist.size());
  json bidders = json::array();
  for (const auto& b : d.bidders) {
    json jb;
    jb["types"] = b.types;
    jb["type_dist"] = std::vector<double>(b.type_dist.data(),
                                          b.type_dist.data() + b.type_dist.size());
    json values = json::array();
    json ctrs = json::array();
    for (Eigen::Index r = 0; r < b.values.rows(); ++r) {
      json vr = json::array();
      json cr = json::array();
      for (Eigen::Index c = 0; c < b.values.cols(); ++c) {
        vr.push_back(b.values(r, c));
        cr.push_back(b.ctrs(r, c));
      }
      values.push_back(vr);
      ctrs.push_back(cr);
    }
    jb["values"] = values;
    jb["ctrs"] = ctrs;
    bidders.push_back(jb);
  }
  doc["bidders"] = bidders;
  doc["bid_grid"] = d.bid_grid;
  json clauses = json::array();
  for (ClauseMask c : d.clauses) {
    json members = json::array();
    for (std::size_t q = 0; q < d.queries.size(); ++q) {
      if ((c >> q) & 1U) members.push_back(q);
    }
    clauses.push_back(members);
  }
  doc["clauses"] = clauses;
  doc["mechanism"] = mechanism_to_json(d.mechanism);
  json learner;
  learner["algorithm"] = d.learner.algorithm == Algorithm::Hedge ? "hedge" : "exp3ix";
  if (d.learner.optimal_tuning) {
    learner["tuning"] = "optimal";
  } else {
    learner["eta"] = d.learner.eta;
  }
  learner["gamma"] = d.learner.gamma;
  learner["raw_rewards"] = d.learner.hedge_raw_rewards;
  doc["learner"] = learner;
  doc["horizon"] = d.horizon;
  doc["window_fraction"] = d.window_fraction;
  doc["env_seed"] = d.env_seed;
  doc["run_seeds"] = d.run_seeds;
  return doc;
}

}  // namespace adsim
