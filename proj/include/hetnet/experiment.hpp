#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hetnet/algorithms.hpp"
#include "hetnet/association.hpp"
#include "hetnet/channel.hpp"
#include "hetnet/metrics.hpp"
#include "hetnet/scheduling.hpp"

namespace hetnet {

/// Everything a sweep needs. Defaults reproduce the two-tier setup
/// (46/20 dBm, exponents 3/3.5, shadowing 8/10 dB, d0 50/1 m, 2 GHz,
/// 180 kHz subbands, M = 100) on a 7-cell desk-scale grid.
struct ScenarioConfig {
  std::string scenario_id = "default";
  LayoutParams layout;
  std::vector<int> user_densities{10, 20, 30, 40, 50};
  RadioParams radio;
  PropagationParams propagation;
  DemandMode demand_mode = DemandMode::uniform;
  double identical_rate_kbps = 1000.0;
  double max_rate_kbps = 2000.0;
  double rate_floor_kbps = 1e-6;
  std::vector<Algorithm> algorithms{Algorithm::max_rate, Algorithm::ye_distributed, Algorithm::qos_distributed,
                                    Algorithm::max_probability};
  std::vector<SchedulePolicy> policies{SchedulePolicy::mprf, SchedulePolicy::marf};
  SolverOpts solver;
  int trials = 20;
  std::uint64_t master_seed = 1;

  [[nodiscard]] Budget budget() const { return Budget{radio.num_subbands}; }
  /// Throws ConfigError on non-physical or empty settings.
  void validate() const;
};

/// Applies one `key = value` setting; throws ConfigError on unknown keys or bad values.
void apply_config_key(ScenarioConfig& cfg, const std::string& key, const std::string& value);

/// Parses the flat key-value format (`#` starts a comment, lists are comma separated).
ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Writes every key with its current value, in parseable form.
void write_config(std::ostream& out, const ScenarioConfig& cfg);

/// One sampled scenario shared by all algorithms of a trial.
struct Realization {
  Topology topology;
  ChannelRealization channel;
  RateMatrix rates;
  DemandProfile demand;
  std::uint64_t hash = 0;
};

Realization realize(const ScenarioConfig& cfg, int users_per_macrocell, std::uint64_t trial_seed);

/// trial seed = mix(master ^ mix(trial index)).
std::uint64_t trial_seed(std::uint64_t master_seed, int trial_index);

struct ResultRow {
  std::string scenario_id;
  int trial = 0;
  std::uint64_t trial_seed = 0;
  std::uint64_t realization_hash = 0;
  Algorithm algorithm = Algorithm::max_rate;
  SchedulePolicy policy = SchedulePolicy::mprf;
  int users_per_macrocell = 0;
  MetricSet metrics;
  std::size_t users = 0;
  int iterations = 0;
  bool converged = false;
  std::string status = "ok";
  double wall_ms = 0.0;
};

struct TrialOutcome {
  std::vector<ResultRow> rows;                 // algorithm-major, then policy
  std::vector<std::optional<AlgorithmResult>> runs;  // per configured algorithm; empty on failure
};

/// Runs every configured algorithm on one realization and schedules the
/// result under every policy. Solver failures become rows with a status message.
TrialOutcome run_trial(const ScenarioConfig& cfg, int users_per_macrocell, int trial_index, std::uint64_t seed,
                       bool keep_runs = false);

struct SummaryStat {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

struct SummaryCell {
  int users_per_macrocell = 0;
  Algorithm algorithm = Algorithm::max_rate;
  SchedulePolicy policy = SchedulePolicy::mprf;
  std::size_t rows = 0;
  std::size_t failures = 0;
  SummaryStat blocking;
  SummaryStat jain_overall;
  SummaryStat jain_macro;
  SummaryStat utility;
  SummaryStat iterations;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;  // density-major, then trial, algorithm, policy
  std::vector<SummaryCell> summary;
};

ExperimentResult run_sweep(const ScenarioConfig& cfg);

std::vector<SummaryCell> summarize(const std::vector<ResultRow>& rows, const ScenarioConfig& cfg);

/// CSV with a fixed header; wall_ms is the last column and the only
/// non-deterministic one, omitted when include_timing is false.
void write_rows_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool include_timing = true);
void write_summary_json(std::ostream& out, const ExperimentResult& result, const ScenarioConfig& cfg);

struct ConvergenceSeries {
  Algorithm algorithm = Algorithm::max_rate;
  std::vector<double> utility;  // per iteration, utility of the current association
  std::vector<double> dual;     // per iteration dual value
  bool converged = false;
  int iterations = 0;
};

/// Per-iteration traces of every configured algorithm on one realization at
/// the first configured density.
std::vector<ConvergenceSeries> emit_convergence(const ScenarioConfig& cfg, std::uint64_t seed);

/// Two-column CSV (iteration, utility).
void write_convergence_csv(std::ostream& out, const ConvergenceSeries& series);

}  // namespace hetnet
