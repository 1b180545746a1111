#include "hetnet/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "hetnet/error.hpp"
#include "hetnet/rng.hpp"

namespace hetnet {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

void fnv_doubles(std::uint64_t& h, std::span<const double> values) {
  fnv_bytes(h, values.data(), values.size_bytes());
}

std::vector<double> resource_utility_trace(const AlgorithmResult& run, const RateMatrix& rates,
                                           const DemandProfile& demand) {
  std::vector<double> out;
  out.reserve(run.trace.size());
  if (run.algorithm == Algorithm::qos_distributed || run.algorithm == Algorithm::max_probability) {
    for (const auto& row : run.trace) out.push_back(row.primal_objective);
    return out;
  }
  if (run.algorithm == Algorithm::max_rate) {
    const Association a = run.association.with_load_model(LoadModel::resource, &demand);
    out.push_back(objective_resource_based(a, rates, demand));
    return out;
  }
  // ye traces record the user-count utility; rebuild each round's choice from its prices
  RealMatrix log_rates(rates.num_bs(), rates.num_users());
  for (std::size_t i = 0; i < log_rates.values().size(); ++i)
    log_rates.values()[i] = std::log(rates.rates.values()[i]);
  std::vector<std::size_t> choice(rates.num_users());
  for (const auto& row : run.trace) {
    reference::choose_users(log_rates, nullptr, row.mu, choice);
    const Association a = Association::integral(choice, rates.num_bs(), LoadModel::resource, &demand);
    out.push_back(objective_resource_based(a, rates, demand));
  }
  return out;
}

SummaryStat stat_of(const std::vector<double>& values) {
  SummaryStat s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::string format_real(double v) {
  std::ostringstream o;
  o << std::setprecision(17) << v;
  return o.str();
}

std::string format_optional(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

std::string hex64(std::uint64_t v) {
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << v;
  return o.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

nlohmann::json to_json(const SummaryStat& s) {
  return {{"mean", s.mean}, {"std", s.stddev}, {"count", s.count}};
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t master_seed, int trial_index) {
  return derive_seed(master_seed, static_cast<std::uint64_t>(trial_index));
}

Realization realize(const ScenarioConfig& cfg, int users_per_macrocell, std::uint64_t seed) {
  LayoutParams layout = cfg.layout;
  layout.users_per_macrocell = users_per_macrocell;
  Realization r;
  r.topology = generate_topology(layout, cfg.radio, seed);
  r.channel = realize_channel(r.topology, cfg.propagation, seed);
  r.rates = achievable_rates(r.topology, r.channel, cfg.radio, cfg.rate_floor_kbps);
  const auto d = sample_demands(cfg.demand_mode, r.topology.num_users(), seed, cfg.identical_rate_kbps,
                                cfg.max_rate_kbps);
  r.demand = resource_demand(r.rates, d);

  std::uint64_t h = kFnvOffset;
  const std::uint64_t shape[2] = {r.rates.num_bs(), r.rates.num_users()};
  fnv_bytes(h, shape, sizeof shape);
  fnv_doubles(h, r.rates.rates.values());
  fnv_doubles(h, r.demand.d);
  r.hash = h;
  return r;
}

TrialOutcome run_trial(const ScenarioConfig& cfg, int users_per_macrocell, int trial_index, std::uint64_t seed,
                       bool keep_runs) {
  const Realization r = realize(cfg, users_per_macrocell, seed);
  const Budget budget = cfg.budget();
  TrialOutcome out;

  for (Algorithm algorithm : cfg.algorithms) {
    ResultRow base;
    base.scenario_id = cfg.scenario_id;
    base.trial = trial_index;
    base.trial_seed = seed;
    base.realization_hash = r.hash;
    base.algorithm = algorithm;
    base.users_per_macrocell = users_per_macrocell;
    base.users = r.topology.num_users();

    const auto start = std::chrono::steady_clock::now();
    std::optional<AlgorithmResult> run;
    try {
      run = run_algorithm(algorithm, r.rates, r.demand, budget, cfg.solver);
    } catch (const SolverError& e) {
      base.status = std::string("solver_error: ") + e.what();
    } catch (const DomainError& e) {
      base.status = std::string("domain_error: ") + e.what();
    }
    const double solve_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    std::optional<Association> resource_assoc;
    double utility = 0.0;
    if (run) {
      base.iterations = run->iterations;
      base.converged = run->converged;
      resource_assoc = run->association.with_load_model(LoadModel::resource, &r.demand);
      utility = objective_resource_based(*resource_assoc, r.rates, r.demand);
    }

    for (SchedulePolicy policy : cfg.policies) {
      ResultRow row = base;
      row.policy = policy;
      row.wall_ms = solve_ms;
      if (resource_assoc) {
        const ScheduleOutcome outcome = schedule(*resource_assoc, r.demand, budget, policy, r.rates);
        row.metrics = compute_metrics(outcome, r.topology, utility);
      }
      out.rows.push_back(std::move(row));
    }
    if (keep_runs) out.runs.push_back(std::move(run));
  }
  return out;
}

ExperimentResult run_sweep(const ScenarioConfig& cfg) {
  cfg.validate();
  const std::size_t trials = static_cast<std::size_t>(cfg.trials);
  const std::size_t jobs = cfg.user_densities.size() * trials;
  std::vector<std::vector<ResultRow>> slots(jobs);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(jobs); ++j) {
    const auto job = static_cast<std::size_t>(j);
    const int density = cfg.user_densities[job / trials];
    const int trial = static_cast<int>(job % trials);
    slots[job] = run_trial(cfg, density, trial, trial_seed(cfg.master_seed, trial)).rows;
  }

  ExperimentResult result;
  for (auto& slot : slots)
    for (auto& row : slot) result.rows.push_back(std::move(row));
  result.summary = summarize(result.rows, cfg);
  return result;
}

std::vector<SummaryCell> summarize(const std::vector<ResultRow>& rows, const ScenarioConfig& cfg) {
  std::vector<SummaryCell> cells;
  for (int density : cfg.user_densities) {
    for (Algorithm algorithm : cfg.algorithms) {
      for (SchedulePolicy policy : cfg.policies) {
        SummaryCell cell;
        cell.users_per_macrocell = density;
        cell.algorithm = algorithm;
        cell.policy = policy;
        std::vector<double> blocking, jain, jain_m, utility, iterations;
        for (const auto& row : rows) {
          if (row.users_per_macrocell != density || row.algorithm != algorithm || row.policy != policy) continue;
          ++cell.rows;
          if (row.status != "ok") {
            ++cell.failures;
            continue;
          }
          blocking.push_back(row.metrics.blocking);
          if (row.metrics.jain_overall) jain.push_back(*row.metrics.jain_overall);
          if (row.metrics.jain_macro) jain_m.push_back(*row.metrics.jain_macro);
          utility.push_back(row.metrics.total_utility);
          iterations.push_back(static_cast<double>(row.iterations));
        }
        cell.blocking = stat_of(blocking);
        cell.jain_overall = stat_of(jain);
        cell.jain_macro = stat_of(jain_m);
        cell.utility = stat_of(utility);
        cell.iterations = stat_of(iterations);
        cells.push_back(cell);
      }
    }
  }
  return cells;
}

void write_rows_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool include_timing) {
  out << "scenario_id,trial,trial_seed,realization_hash,algorithm,policy,users_per_macrocell,users,"
         "blocking,jain_overall,jain_macro,served,iterations,converged,utility,status";
  if (include_timing) out << ",wall_ms";
  out << "\n";
  for (const auto& r : rows) {
    out << csv_field(r.scenario_id) << ',' << r.trial << ',' << r.trial_seed << ',' << hex64(r.realization_hash)
        << ',' << to_string(r.algorithm) << ',' << to_string(r.policy) << ',' << r.users_per_macrocell << ','
        << r.users << ',';
    if (r.status == "ok") {
      out << format_real(r.metrics.blocking) << ',' << format_optional(r.metrics.jain_overall) << ','
          << format_optional(r.metrics.jain_macro) << ',' << r.metrics.served_count << ',';
    } else {
      out << ",,,,";
    }
    out << r.iterations << ',' << (r.converged ? 1 : 0) << ',';
    if (r.status == "ok") out << format_real(r.metrics.total_utility);
    out << ',' << csv_field(r.status);
    if (include_timing) out << ',' << std::fixed << std::setprecision(3) << r.wall_ms << std::defaultfloat;
    out << "\n";
  }
}

void write_summary_json(std::ostream& out, const ExperimentResult& result, const ScenarioConfig& cfg) {
  nlohmann::json doc;
  doc["scenario_id"] = cfg.scenario_id;
  doc["master_seed"] = cfg.master_seed;
  doc["trials"] = cfg.trials;
  doc["subbands"] = cfg.radio.num_subbands;
  doc["demand_mode"] = cfg.demand_mode == DemandMode::identical ? "identical" : "uniform";
  nlohmann::json points = nlohmann::json::array();
  for (int density : cfg.user_densities) {
    nlohmann::json point;
    point["users_per_macrocell"] = density;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& cell : result.summary) {
      if (cell.users_per_macrocell != density) continue;
      entries.push_back({{"algorithm", to_string(cell.algorithm)},
                         {"policy", to_string(cell.policy)},
                         {"rows", cell.rows},
                         {"failures", cell.failures},
                         {"blocking", to_json(cell.blocking)},
                         {"jain_overall", to_json(cell.jain_overall)},
                         {"jain_macro", to_json(cell.jain_macro)},
                         {"utility", to_json(cell.utility)},
                         {"iterations", to_json(cell.iterations)}});
    }
    point["results"] = std::move(entries);
    points.push_back(std::move(point));
  }
  doc["points"] = std::move(points);
  out << doc.dump(2) << "\n";
}

std::vector<ConvergenceSeries> emit_convergence(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const Realization r = realize(cfg, cfg.user_densities.front(), seed);
  std::vector<ConvergenceSeries> out;
  for (Algorithm algorithm : cfg.algorithms) {
    const AlgorithmResult run = run_algorithm(algorithm, r.rates, r.demand, cfg.budget(), cfg.solver);
    ConvergenceSeries series;
    series.algorithm = algorithm;
    series.utility = resource_utility_trace(run, r.rates, r.demand);
    for (const auto& row : run.trace) series.dual.push_back(row.dual_value);
    series.converged = run.converged;
    series.iterations = run.iterations;
    out.push_back(std::move(series));
  }
  return out;
}

void write_convergence_csv(std::ostream& out, const ConvergenceSeries& series) {
  out << "iteration,utility\n";
  for (std::size_t i = 0; i < series.utility.size(); ++i) out << i << ',' << format_real(series.utility[i]) << "\n";
}

}  // namespace hetnet
