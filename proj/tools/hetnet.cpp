#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hetnet/error.hpp"
#include "hetnet/experiment.hpp"
#include "hetnet/oracle.hpp"
#include "hetnet/rng.hpp"

namespace fs = std::filesystem;
using namespace hetnet;

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string algorithms;
  std::string policy;
  std::optional<int> trials;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "Scenario file (key = value lines)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "Master seed");
  cmd->add_option("--out", args.out, "Output directory");
  cmd->add_option("--algorithms", args.algorithms,
                  "Comma list of max_rate, ye_distributed, qos_distributed, max_probability");
  cmd->add_option("--policy", args.policy, "mprf, marf or a comma list");
  cmd->add_option("--trials", args.trials, "Trials per density point");
}

ScenarioConfig build_config(const CommonArgs& args) {
  ScenarioConfig cfg = args.config.empty() ? ScenarioConfig{} : load_config(args.config);
  if (args.seed) cfg.master_seed = *args.seed;
  if (!args.algorithms.empty()) apply_config_key(cfg, "algorithms", args.algorithms);
  if (!args.policy.empty()) apply_config_key(cfg, "policies", args.policy);
  if (args.trials) cfg.trials = *args.trials;
  cfg.validate();
  return cfg;
}

fs::path output_dir(const CommonArgs& args) {
  fs::path dir = args.out.empty() ? fs::path("out") : fs::path(args.out);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

std::string opt_str(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

int cmd_run(const CommonArgs& args) {
  const ScenarioConfig cfg = build_config(args);
  const fs::path dir = output_dir(args);
  const ExperimentResult result = run_sweep(cfg);
  {
    auto f = open_output(dir / "results.csv");
    write_rows_csv(f, result.rows);
  }
  {
    auto f = open_output(dir / "summary.json");
    write_summary_json(f, result, cfg);
  }
  {
    auto f = open_output(dir / "config.txt");
    write_config(f, cfg);
  }
  std::printf("%-8s %-16s %-5s %9s %9s %9s %12s\n", "density", "algorithm", "pol", "blocking", "jain", "jain_mac",
              "utility");
  for (const auto& c : result.summary)
    std::printf("%-8d %-16s %-5s %9.4f %9.4f %9.4f %12.2f\n", c.users_per_macrocell,
                std::string(to_string(c.algorithm)).c_str(), std::string(to_string(c.policy)).c_str(),
                c.blocking.mean, c.jain_overall.mean, c.jain_macro.mean, c.utility.mean);
  std::printf("%zu rows written to %s\n", result.rows.size(), dir.string().c_str());
  return 0;
}

int cmd_trial(const CommonArgs& args, int trial_index, std::optional<int> density) {
  const ScenarioConfig cfg = build_config(args);
  const int users = density.value_or(cfg.user_densities.front());
  const std::uint64_t seed = trial_seed(cfg.master_seed, trial_index);
  const TrialOutcome outcome = run_trial(cfg, users, trial_index, seed, true);
  std::printf("trial %d seed %llu users/macrocell %d realization %016llx\n", trial_index,
              static_cast<unsigned long long>(seed), users,
              static_cast<unsigned long long>(outcome.rows.front().realization_hash));
  for (const auto& row : outcome.rows)
    std::printf("  %-16s %-5s blocking %.4f jain %s jain_macro %s served %zu/%zu iters %d%s utility %.3f %s\n",
                std::string(to_string(row.algorithm)).c_str(), std::string(to_string(row.policy)).c_str(),
                row.metrics.blocking, opt_str(row.metrics.jain_overall).c_str(),
                opt_str(row.metrics.jain_macro).c_str(), row.metrics.served_count, row.users, row.iterations,
                row.converged ? "" : " (not converged)", row.metrics.total_utility, row.status.c_str());
  if (!args.out.empty()) {
    const fs::path dir = output_dir(args);
    for (std::size_t i = 0; i < outcome.runs.size(); ++i) {
      if (!outcome.runs[i]) continue;
      auto f = open_output(dir / ("trace_" + std::string(to_string(cfg.algorithms[i])) + ".csv"));
      f << "iteration,dual,primal,relaxed\n";
      for (const auto& t : outcome.runs[i]->trace) {
        f << t.iteration << ',' << t.dual_value << ',' << t.primal_objective << ',';
        if (t.relaxed_objective) f << *t.relaxed_objective;
        f << "\n";
      }
    }
    auto f = open_output(dir / "trial.csv");
    write_rows_csv(f, outcome.rows);
  }
  return 0;
}

int cmd_converge(const CommonArgs& args) {
  const ScenarioConfig cfg = build_config(args);
  const fs::path dir = output_dir(args);
  const auto series = emit_convergence(cfg, trial_seed(cfg.master_seed, 0));
  for (const auto& s : series) {
    const std::string name(to_string(s.algorithm));
    auto f = open_output(dir / ("convergence_" + name + ".csv"));
    write_convergence_csv(f, s);
    std::printf("%-16s iterations %4d %s final utility %.4f\n", name.c_str(), s.iterations,
                s.converged ? "converged    " : "not converged", s.utility.empty() ? 0.0 : s.utility.back());
  }
  return 0;
}

// One macrocell with two picos and 2..6 users from the channel pipeline.
TinyInstance sampled_instance(std::uint64_t seed, std::uint64_t index) {
  ScenarioConfig cfg;
  cfg.layout.macro_count = 1;
  cfg.layout.picos_per_macrocell = 2;
  const int users = 2 + static_cast<int>(derive_seed(seed, 1000000 + index) % 5);
  const Realization r = realize(cfg, users, derive_seed(seed, index));
  return TinyInstance{r.rates, r.demand, cfg.budget()};
}

int cmd_verify(const CommonArgs& args, int instances) {
  const std::uint64_t seed = args.seed.value_or(1);
  SolverOpts opts;
  opts.relaxed_tolerance = 1e-10;
  int checked = 0, within = 0, bounded = 0, infeasible = 0;
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    const TinyInstance inst = sampled_instance(seed, static_cast<std::uint64_t>(i));
    const auto best = exhaustive_resource_opt(inst);
    if (!best) {
      ++infeasible;
      continue;
    }
    const AlgorithmResult mp = max_probability(inst.rates, inst.demand, inst.budget, opts);
    const double got = objective_resource_based(mp.association, inst.rates, inst.demand);
    const double rel = std::abs(got - best->objective) / std::max(1.0, std::abs(best->objective));
    worst = std::max(worst, rel);
    ++checked;
    if (rel <= 0.05) ++within;
    if (*mp.relaxed_objective >= best->objective - 1e-9 * std::max(1.0, std::abs(best->objective))) ++bounded;
  }
  std::printf("instances %d, infeasible %d, checked %d\n", instances, infeasible, checked);
  std::printf("rounded objective within 5%% of the exhaustive optimum: %d/%d (worst %.4f)\n", within, checked, worst);
  std::printf("relaxed optimum bounds the integral optimum: %d/%d\n", bounded, checked);
  return within == checked && bounded == checked ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"User association simulator for two-tier cellular networks"};
  app.require_subcommand(1);

  CommonArgs run_args, trial_args, converge_args, verify_args;
  auto* run = app.add_subcommand("run", "Density sweep; writes results.csv and summary.json");
  add_common(run, run_args);

  int trial_index = 0;
  std::optional<int> density;
  auto* trial = app.add_subcommand("trial", "One trial with per-row metrics and solver traces");
  add_common(trial, trial_args);
  trial->add_option("--trial", trial_index, "Trial index under the master seed");
  trial->add_option("--users", density, "Users per macrocell (defaults to the first density)");

  auto* converge = app.add_subcommand("converge", "Utility per iteration for every algorithm on one realization");
  add_common(converge, converge_args);

  int instances = 100;
  auto* verify = app.add_subcommand("verify", "Compare max_probability against exhaustive search on tiny instances");
  verify->add_option("--seed", verify_args.seed, "Instance generator seed");
  verify->add_option("--instances", instances, "Number of random instances")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_args);
    if (*trial) return cmd_trial(trial_args, trial_index, density);
    if (*converge) return cmd_converge(converge_args);
    if (*verify) return cmd_verify(verify_args, instances);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
