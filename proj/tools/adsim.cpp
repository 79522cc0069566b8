// adsim: run, sweep, infer and bce subcommands over scenario files.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "adsim/config.hpp"
#include "adsim/equilibrium.hpp"
#include "adsim/inference.hpp"
#include "adsim/io.hpp"
#include "adsim/learners.hpp"
#include "adsim/rng.hpp"
#include "adsim/scenario.hpp"
#include "adsim/simulator.hpp"

#ifndef ADSIM_VERSION
#define ADSIM_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace adsim;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string scenario;
  std::size_t runs = 10;
  std::uint64_t seed = 1;
  std::string out = "out";
  std::string mechanism;
};

std::vector<double> parse_value_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    out.push_back(parse_double(item));
  }
  if (out.empty()) throw ValidationError("empty value list: '" + text + "'");
  return out;
}

Scenario load_with_override(const Common& c) {
  Scenario s = load_scenario(c.scenario);
  if (!c.mechanism.empty()) {
    MechanismSpec m = parse_mechanism(c.mechanism);
    m.tie_policy = s.mechanism().tie_policy;
    m.price_space = s.mechanism().price_space;
    s = s.with_mechanism(m);
  }
  return s;
}

json learner_json(const Scenario& s) {
  const LearnerState st = make_learner_state(s);
  json j;
  j["algorithm"] = s.learner().algorithm == Algorithm::Hedge ? "hedge" : "exp3ix";
  j["eta"] = st.eta;
  j["gamma"] = st.gamma;
  j["raw_rewards"] = s.learner().hedge_raw_rewards;
  return j;
}

json base_metadata(const std::string& command, const Scenario& s,
                   const Common& c, const std::vector<std::uint64_t>& seeds) {
  json meta;
  meta["version"] = ADSIM_VERSION;
  meta["command"] = command;
  meta["scenario_file"] = c.scenario;
  meta["scenario_id"] = s.desc().id;
  meta["master_seed"] = c.seed;
  meta["env_seed"] = s.desc().env_seed;
  meta["runs"] = seeds.size();
  meta["run_seeds"] = seeds;
  meta["horizon"] = s.horizon();
  meta["window_length"] = s.window_length();
  meta["mechanism"] = mechanism_to_json(s.mechanism());
  meta["learner"] = learner_json(s);
  meta["stdev"] = "population (divide by number of runs)";
  meta["revenue"] = "expected per impression: winner CTR x price per click";
  meta["scenario"] = scenario_to_json(s);
  return meta;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

void write_revenue_rows(CsvWriter& w, const Scenario& s, const BatchResult& b) {
  const MechanismSpec& m = s.mechanism();
  for (const RunResult& r : b.runs) {
    w.cell(s.desc().id).cell(mechanism_kind(m)).cell(m.floor).cell(r.run_seed)
        .cell(r.mean_revenue);
    w.end_row();
  }
}

void write_bids(const fs::path& path, const Scenario& s, const BatchResult& b) {
  CsvWriter w(path, {"scenario_id", "run_seed", "bidder", "type", "clause_mask",
                     "bid", "count"});
  for (const RunResult& r : b.runs) {
    const BidHistogram& h = r.bid_histogram;
    for (std::size_t i = 0; i < s.num_bidders(); ++i) {
      for (std::size_t t = 0; t < s.num_types(i); ++t) {
        for (std::size_t a = 0; a < s.num_actions(); ++a) {
          const std::uint64_t n = h.count(i, t, a);
          if (n == 0) continue;
          const Action act = s.action_at(a);
          w.cell(s.desc().id).cell(r.run_seed).cell(i)
              .cell(s.desc().bidders[i].types[t]).cell(s.clause(act.clause_index))
              .cell(s.bid(act.bid_index)).cell(n);
          w.end_row();
        }
      }
    }
  }
  w.close();
}

void write_trace(const fs::path& path, const Scenario& s, const BatchResult& b) {
  CsvWriter w(path, {"run_seed", "period", "query", "winner", "price", "bidder",
                     "type", "bid_index", "clause_index"});
  for (const RunResult& r : b.runs) {
    const PeriodTrace& tr = *r.trace;
    const std::size_t n = tr.num_bidders;
    for (std::size_t k = 0; k < tr.size(); ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        const Action act = s.action_at(tr.actions[k * n + i]);
        w.cell(r.run_seed).cell(tr.periods[k]).cell(tr.queries[k]).cell(tr.winners[k])
            .cell(tr.prices[k]).cell(i).cell(tr.types[k * n + i]).cell(act.bid_index)
            .cell(act.clause_index);
        w.end_row();
      }
    }
  }
  w.close();
}

int cmd_run(const Common& c, bool trace, bool realized_clicks) {
  const Scenario s = load_with_override(c);
  const fs::path out(c.out);
  ensure_directory(out);
  RunOptions opts;
  opts.trace = trace ? TraceMode::Window : TraceMode::None;
  opts.realized_clicks = realized_clicks;
  const BatchResult b = run_batch(s, c.runs, c.seed, opts);

  CsvWriter rev(out / "revenues.csv",
                {"scenario_id", "mechanism", "floor", "run_seed", "mean_revenue"});
  write_revenue_rows(rev, s, b);
  rev.close();
  write_bids(out / "bids.csv", s, b);
  if (trace) write_trace(out / "trace.csv", s, b);

  json meta = base_metadata("run", s, c, batch_run_seeds(s, c.runs, c.seed));
  meta["realized_clicks"] = realized_clicks;
  meta["trace"] = trace;
  meta["mean_revenue"] = b.mean;
  meta["stdev_revenue"] = b.stdev;
  write_json(out / "metadata.json", meta);

  std::cout << "scenario=" << s.desc().id << " mechanism=" << mechanism_kind(s.mechanism())
            << " floor=" << format_double(s.mechanism().floor)
            << " mean_revenue=" << format_double(b.mean)
            << " stdev=" << format_double(b.stdev) << '\n';
  return 0;
}

int cmd_sweep(const Common& c, const std::string& soft_values,
              const std::string& reserve_values) {
  if (soft_values.empty() && reserve_values.empty()) {
    throw ValidationError("sweep needs --sweep-values and/or --reserve-values");
  }
  const Scenario s = load_with_override(c);
  const fs::path out(c.out);
  ensure_directory(out);

  struct Part {
    SweepParameter param;
    std::vector<double> values;
    std::vector<BatchResult> results;
  };
  std::vector<Part> parts;
  if (!soft_values.empty()) {
    parts.push_back({SweepParameter::SoftFloor, parse_value_list(soft_values), {}});
  }
  if (!reserve_values.empty()) {
    parts.push_back({SweepParameter::HardReserve, parse_value_list(reserve_values), {}});
  }
  for (auto& p : parts) {
    for (double v : p.values) {
      if (!(v >= 0.0)) throw ValidationError("floor values must be >= 0");
    }
    p.results = sweep(s, p.param, p.values, c.runs, c.seed);
  }

  CsvWriter sw(out / "sweep.csv", {"scenario_id", "mechanism", "floor", "mean", "stdev"});
  CsvWriter rev(out / "revenues.csv",
                {"scenario_id", "mechanism", "floor", "run_seed", "mean_revenue"});
  for (const auto& p : parts) {
    const std::string kind = p.param == SweepParameter::SoftFloor ? "soft" : "reserve";
    for (std::size_t k = 0; k < p.values.size(); ++k) {
      const BatchResult& b = p.results[k];
      sw.cell(s.desc().id).cell(kind).cell(p.values[k]).cell(b.mean).cell(b.stdev);
      sw.end_row();
      MechanismSpec m = s.mechanism();
      m.rule = p.param == SweepParameter::SoftFloor ? PriceRule::SoftFloor
                                                    : PriceRule::HardReserve;
      m.floor = p.values[k];
      write_revenue_rows(rev, s.with_mechanism(m), b);
      std::cout << kind << ' ' << format_double(p.values[k])
                << " mean=" << format_double(b.mean)
                << " stdev=" << format_double(b.stdev) << '\n';
    }
  }
  sw.close();
  rev.close();

  json meta = base_metadata("sweep", s, c, batch_run_seeds(s, c.runs, c.seed));
  if (!soft_values.empty()) meta["soft_floor_values"] = parse_value_list(soft_values);
  if (!reserve_values.empty()) meta["reserve_values"] = parse_value_list(reserve_values);
  write_json(out / "metadata.json", meta);
  return 0;
}

struct ObservedInput {
  std::vector<double> percentiles;
  std::vector<double> bids;
};

// Accepts (percentile, observed_bid) rows, a bids.csv histogram, or one raw
// bid per line.
ObservedInput read_observed(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw ValidationError("no bid samples in " + path.string());

  const auto header = split_csv_line(lines.front());
  auto find = [&](std::string_view name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };

  ObservedInput obs;
  try {
    if (auto pc = find("percentile"), bc = find("observed_bid"); pc && bc) {
      for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto cells = split_csv_line(lines[k]);
        obs.percentiles.push_back(parse_double(cells.at(*pc)));
        obs.bids.push_back(parse_double(cells.at(*bc)));
      }
      if (obs.bids.empty()) throw ValidationError("no bid samples in " + path.string());
      return obs;
    }
    obs.percentiles = kDefaultPercentiles;
    if (auto bc = find("bid"), cc = find("count"); bc && cc) {
      std::vector<std::pair<double, std::uint64_t>> pairs;
      for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto cells = split_csv_line(lines[k]);
        pairs.emplace_back(parse_double(cells.at(*bc)), parse_uint(cells.at(*cc)));
      }
      std::sort(pairs.begin(), pairs.end());
      std::vector<double> support;
      std::vector<std::uint64_t> counts;
      for (const auto& [b, n] : pairs) {
        if (!support.empty() && support.back() == b) {
          counts.back() += n;
        } else {
          support.push_back(b);
          counts.push_back(n);
        }
      }
      if (support.empty()) throw ValidationError("no bid samples in " + path.string());
      obs.bids = histogram_percentiles(support, counts, obs.percentiles);
      return obs;
    }
    std::vector<double> samples;
    for (std::size_t k = 0; k < lines.size(); ++k) {
      const auto cell = split_csv_line(lines[k]).front();
      if (k == 0) {
        try {
          samples.push_back(parse_double(cell));
        } catch (const std::invalid_argument&) {
        }
        continue;
      }
      samples.push_back(parse_double(cell));
    }
    if (samples.empty()) throw ValidationError("no bid samples in " + path.string());
    obs.bids = observed_percentiles(samples, obs.percentiles);
    return obs;
  } catch (const std::out_of_range&) {
    throw ValidationError("malformed bid file: " + path.string());
  }
}

int cmd_infer(const Common& c, const std::string& bids_path, double alpha,
              std::size_t iterations, std::size_t bidders, std::int64_t horizon,
              const std::string& truth) {
  const ObservedInput obs = read_observed(bids_path);
  for (std::size_t k = 1; k < obs.bids.size(); ++k) {
    if (obs.bids[k] < obs.bids[k - 1]) {
      std::cerr << "warning: observed bids not monotone in percentile; flattened\n";
      break;
    }
  }
  InferenceConfig cfg;
  cfg.percentiles = obs.percentiles;
  cfg.alpha = alpha;
  cfg.max_iterations = iterations;
  cfg.runs_per_iteration = c.runs;
  cfg.num_bidders = bidders;
  cfg.horizon = horizon;
  cfg.master_seed = c.seed;
  cfg.env_seed = derive_seed(c.seed, 0xE57);
  const MechanismSpec mech =
      parse_mechanism(c.mechanism.empty() ? "second" : c.mechanism);

  const InferenceResult r = infer_values(obs.bids, mech, cfg);
  const fs::path out(c.out);
  ensure_directory(out);

  CsvWriter inf(out / "inference.csv", {"iteration", "percentile", "observed_bid",
                                        "predicted_bid", "inferred_value", "mae"});
  for (const IterationRecord& rec : r.history) {
    for (std::size_t k = 0; k < r.percentiles.size(); ++k) {
      inf.cell(rec.iteration).cell(r.percentiles[k]).cell(r.observed[k])
          .cell(rec.predicted[k]).cell(rec.values[k]).cell(rec.mae);
      inf.end_row();
    }
  }
  inf.close();

  const IterationRecord& best = r.best_record();
  const ShadingReport sh = shading_report(best.values, best.predicted,
                                          best.predicted_per_run);
  CsvWriter shw(out / "shading.csv", {"percentile", "value", "predicted_bid", "shading"});
  for (std::size_t k = 0; k < r.percentiles.size(); ++k) {
    shw.cell(r.percentiles[k]).cell(sh.values[k]).cell(sh.predicted[k])
        .cell(sh.shading[k]);
    shw.end_row();
  }
  shw.close();

  json meta;
  meta["version"] = ADSIM_VERSION;
  meta["command"] = "infer";
  meta["bids_file"] = bids_path;
  meta["mechanism"] = mechanism_to_json(mech);
  meta["master_seed"] = c.seed;
  meta["env_seed"] = cfg.env_seed;
  meta["alpha"] = alpha;
  meta["max_iterations"] = iterations;
  meta["runs_per_iteration"] = c.runs;
  meta["num_bidders"] = bidders;
  meta["horizon"] = horizon;
  meta["window_fraction"] = cfg.window_fraction;
  meta["eta"] = cfg.eta;
  meta["grid_step"] = cfg.grid_step;
  meta["grid_headroom"] = cfg.grid_headroom;
  meta["percentile_weights"] = "cdf";
  meta["percentile_method"] = "nearest rank";
  meta["best_iteration"] = best.iteration;
  meta["best_mae"] = best.mae;
  meta["converged"] = r.converged;
  meta["mean_shading"] = sh.mean;
  meta["shading_ci95"] = {sh.ci_low, sh.ci_high};
  write_json(out / "metadata.json", meta);

  std::cout << "best_iteration=" << best.iteration
            << " bid_mae=" << format_double(best.mae)
            << " mean_shading=" << format_double(sh.mean) << " ci95=["
            << format_double(sh.ci_low) << "," << format_double(sh.ci_high) << "]\n";
  if (!truth.empty()) {
    const auto t = parse_value_list(truth);
    if (t.size() != best.values.size()) {
      throw ValidationError("--truth needs one value per percentile");
    }
    std::cout << "value_mae=" << format_double(mae(best.values, t)) << '\n';
  }
  return 0;
}

int cmd_bce(const Common& c, const std::string& in_dir) {
  const Scenario s = load_with_override(c);
  const fs::path trace_path = fs::path(in_dir) / "trace.csv";
  if (!fs::exists(trace_path)) {
    throw ValidationError("trace recording disabled: no trace.csv in " + in_dir);
  }
  const CsvTable t = read_csv(trace_path);
  if (t.rows.empty()) throw ValidationError("empty trace: " + trace_path.string());
  const std::size_t n = s.num_bidders();
  const std::size_t c_seed = t.column("run_seed");
  const std::size_t c_period = t.column("period");
  const std::size_t c_bidder = t.column("bidder");
  const std::size_t c_type = t.column("type");
  const std::size_t c_bid = t.column("bid_index");
  const std::size_t c_clause = t.column("clause_index");

  EmpiricalProfile profile(n);
  std::vector<TypeIndex> types(n);
  std::vector<std::uint32_t> actions(n);
  if (t.rows.size() % n != 0) throw ValidationError("trace rows not a multiple of bidders");
  for (std::size_t k = 0; k < t.rows.size(); k += n) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& row = t.rows.at(k + i);
      if (row.size() != t.header.size() || parse_uint(row[c_bidder]) != i ||
          row[c_seed] != t.rows[k][c_seed] || row[c_period] != t.rows[k][c_period]) {
        throw ValidationError("malformed trace row " + std::to_string(k + i + 2));
      }
      const auto type = parse_uint(row[c_type]);
      const auto bid = parse_uint(row[c_bid]);
      const auto clause = parse_uint(row[c_clause]);
      if (type >= s.num_types(i) || bid >= s.num_bids() || clause >= s.num_clauses()) {
        throw ValidationError("trace does not match scenario at row " +
                              std::to_string(k + i + 2));
      }
      types[i] = static_cast<TypeIndex>(type);
      actions[i] = static_cast<std::uint32_t>(s.action_index(
          {static_cast<std::uint32_t>(bid), static_cast<std::uint32_t>(clause)}));
    }
    profile.add(types, actions);
  }

  const BceReport rep = coarse_bce_epsilon(profile, s);
  const fs::path out(c.out);
  ensure_directory(out);
  CsvWriter w(out / "bce.csv", {"bidder", "type", "best_deviation_bid",
                                "best_deviation_clause", "gain"});
  for (const DeviationGain& g : rep.gains) {
    w.cell(g.bidder).cell(s.desc().bidders[g.bidder].types[g.type]);
    if (g.realized) {
      const Action a = s.action_at(g.best_action);
      w.cell(s.bid(a.bid_index)).cell(s.clause(a.clause_index)).cell(g.gain);
    } else {
      w.cell(std::string_view("")).cell(std::string_view("")).cell(std::string_view(""));
    }
    w.end_row();
  }
  w.close();
  for (const auto& [i, ty] : rep.unrealized) {
    std::cerr << "warning: bidder " << i << " type "
              << s.desc().bidders[i].types[ty] << " never realized in trace\n";
  }
  std::cout << "epsilon=" << format_double(rep.epsilon)
            << " raw_max_gain=" << format_double(rep.raw_max_gain)
            << " samples=" << profile.size() << '\n';
  return 0;
}

void add_common(CLI::App* sub, Common& c, bool needs_scenario) {
  auto* opt = sub->add_option("--scenario", c.scenario, "scenario JSON file");
  if (needs_scenario) opt->required();
  sub->add_option("--runs", c.runs, "independent runs")->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "master seed");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--mechanism", c.mechanism, "first|second|reserve:R|soft:S");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Auction simulator with no-regret learning bidders"};
  app.set_version_flag("--version", ADSIM_VERSION);
  app.require_subcommand(1);

  Common common;
  bool trace = false;
  bool realized_clicks = false;
  auto* run = app.add_subcommand("run", "simulate a scenario");
  add_common(run, common, true);
  run->add_flag("--trace", trace, "write the window trace to trace.csv");
  run->add_flag("--realized-clicks", realized_clicks, "record revenue on sampled clicks");

  std::string soft_values;
  std::string reserve_values;
  auto* sw = app.add_subcommand("sweep", "sweep soft floors and/or hard reserves");
  add_common(sw, common, true);
  sw->add_option("--sweep-values", soft_values, "comma-separated soft floors");
  sw->add_option("--reserve-values", reserve_values, "comma-separated hard reserves");

  std::string bids_path;
  double alpha = 0.2;
  std::size_t iterations = 100;
  std::size_t bidders = 2;
  std::int64_t horizon = 200000;
  std::string truth;
  auto* infer = app.add_subcommand("infer", "infer values from observed bids");
  add_common(infer, common, false);
  infer->add_option("--bids", bids_path, "observed bids file")->required();
  infer->add_option("--alpha", alpha, "value update rate");
  infer->add_option("--iterations", iterations, "maximum iterations");
  infer->add_option("--bidders", bidders, "symmetric bidders per auction");
  infer->add_option("--horizon", horizon, "periods per simulation");
  infer->add_option("--truth", truth, "true values per percentile, for reporting");

  std::string in_dir;
  auto* bce = app.add_subcommand("bce", "coarse BCE check on a recorded trace");
  add_common(bce, common, true);
  bce->add_option("--in", in_dir, "directory of a run made with --trace")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (*run) return cmd_run(common, trace, realized_clicks);
    if (*sw) return cmd_sweep(common, soft_values, reserve_values);
    if (*infer) {
      return cmd_infer(common, bids_path, alpha, iterations, bidders, horizon, truth);
    }
    if (*bce) return cmd_bce(common, in_dir);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}
