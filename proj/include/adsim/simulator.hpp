#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "adsim/scenario.hpp"

namespace adsim {

/// Window counts indexed by (bidder, type, flattened action).
class BidHistogram {
 public:
  BidHistogram() = default;
  explicit BidHistogram(const Scenario& scenario);

  void add(std::size_t bidder, std::size_t type, std::size_t action,
           std::uint64_t count = 1) {
    counts_[offsets_[bidder] + type * num_actions_ + action] += count;
  }
  std::uint64_t count(std::size_t bidder, std::size_t type,
                      std::size_t action) const {
    return counts_[offsets_[bidder] + type * num_actions_ + action];
  }
  std::uint64_t total() const;
  std::size_t num_actions() const { return num_actions_; }
  std::size_t num_bidders() const { return offsets_.size(); }
  std::size_t num_types(std::size_t bidder) const { return types_[bidder]; }

 private:
  std::size_t num_actions_ = 0;
  std::vector<std::size_t> types_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint64_t> counts_;
};

/// Per-period record of the measured (or full) run.
struct PeriodTrace {
  std::size_t num_bidders = 0;
  std::vector<std::int64_t> periods;
  std::vector<QueryIndex> queries;
  std::vector<std::int32_t> winners;  // -1 when unsold
  std::vector<double> prices;
  std::vector<TypeIndex> types;        // rows x N
  std::vector<std::uint32_t> actions;  // rows x N, flattened action index

  std::size_t size() const { return periods.size(); }
};

enum class TraceMode { None, Window, Full };

struct RunOptions {
  TraceMode trace = TraceMode::None;
  /// Record revenue as price on a Bernoulli(CTR) click instead of CTR x price.
  bool realized_clicks = false;
};

struct RunResult {
  std::uint64_t run_seed = 0;
  double mean_revenue = 0.0;
  std::int64_t window_length = 0;
  BidHistogram bid_histogram;
  std::optional<PeriodTrace> trace;
};

struct BatchResult {
  std::vector<RunResult> runs;
  double mean = 0.0;
  /// Population (divide-by-n) standard deviation of per-run revenues.
  double stdev = 0.0;

  std::vector<double> revenues() const;
};

/// Runs seeds supplied by the scenario, else derived from `master_seed`.
std::vector<std::uint64_t> batch_run_seeds(const Scenario& scenario,
                                           std::size_t num_runs,
                                           std::uint64_t master_seed);

/// One T-period simulation. Deterministic in (scenario, env, run_seed).
RunResult run_simulation(const Scenario& scenario, const EnvSequence& env,
                         std::uint64_t run_seed, const RunOptions& options = {});

/// Independent runs sharing one environment sequence. Runs execute on up to
/// `worker_count()` threads; results are ordered by run index.
BatchResult run_batch(const Scenario& scenario, std::size_t num_runs,
                      std::uint64_t master_seed, const RunOptions& options = {});
BatchResult run_batch(const Scenario& scenario, const EnvSequence& env,
                      const std::vector<std::uint64_t>& run_seeds,
                      const RunOptions& options = {});

enum class SweepParameter { SoftFloor, HardReserve };

/// One batch per floor value; the environment sequence and run seeds are
/// shared across values.
std::vector<BatchResult> sweep(const Scenario& scenario_template,
                               SweepParameter parameter,
                               const std::vector<double>& values,
                               std::size_t num_runs, std::uint64_t master_seed,
                               const RunOptions& options = {});

/// Thread count from ADSIM_THREADS, else hardware concurrency (at least 1).
std::size_t worker_count();

/// Population mean and standard deviation.
std::pair<double, double> mean_and_stdev(const std::vector<double>& xs);

}  // namespace adsim
