// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetnet/algorithms.hpp"
#include "hetnet/experiment.hpp"
#include "hetnet/metrics.hpp"
#include "hetnet/oracle.hpp"
#include "hetnet/rng.hpp"
#include "hetnet/scheduling.hpp"

using namespace hetnet;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, std::string note) {
    pass = pass && ok;
    notes.push_back((ok ? "" : "[x] ") + std::move(note));
  }
};

int failures = 0;

void report(int id, const char* title, const Verdict& v) {
  std::printf("CRITERION %d %s: %s\n", id, v.pass ? "PASS" : "FAIL", title);
  for (const auto& n : v.notes) std::printf("    %s\n", n.c_str());
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

// Tiny instances drawn from the channel pipeline: one macrocell with two picos
// and 2..6 users, M = 100. Instances without a feasible integral assignment are redrawn.
constexpr std::uint64_t kTinySeed = 1;
constexpr int kTinyCount = 200;

std::vector<TinyInstance> tiny_instances() {
  ScenarioConfig cfg;
  cfg.layout.macro_count = 1;
  cfg.layout.picos_per_macrocell = 2;
  std::vector<TinyInstance> out;
  for (std::uint64_t i = 0; static_cast<int>(out.size()) < kTinyCount; ++i) {
    const int users = 2 + static_cast<int>(derive_seed(kTinySeed, 1000000 + i) % 5);
    const Realization r = realize(cfg, users, derive_seed(kTinySeed, i));
    TinyInstance inst{r.rates, r.demand, cfg.budget()};
    if (exhaustive_resource_opt(inst)) out.push_back(std::move(inst));
  }
  return out;
}

void criterion_oracle(const std::vector<TinyInstance>& instances) {
  const auto start = Clock::now();
  SolverOpts opts;
  opts.relaxed_tolerance = 1e-10;
  int within = 0, bounded = 0;
  double worst = 0.0;
  for (const TinyInstance& inst : instances) {
    const auto best = exhaustive_resource_opt(inst);
    const AlgorithmResult mp = max_probability(inst.rates, inst.demand, inst.budget, opts);
    const double got = objective_resource_based(mp.association, inst.rates, inst.demand);
    const double gap = std::abs(got - best->objective) / std::abs(best->objective);
    worst = std::max(worst, gap);
    if (gap <= 0.05) ++within;
    if (*mp.relaxed_objective >= best->objective - 1e-9 * std::abs(best->objective)) ++bounded;
  }
  const double elapsed = seconds_since(start);
  const int n = static_cast<int>(instances.size());
  Verdict v;
  v.require(n >= 100, fmt("%d instances (N<=3, K<=6)", n));
  v.require(within == n, fmt("rounded within 5%% of the exhaustive optimum: %d/%d (worst gap %.4f)", within, n, worst));
  v.require(bounded == n, fmt("relaxed optimum >= integral optimum: %d/%d", bounded, n));
  v.require(elapsed < 30.0, fmt("runtime %.2f s", elapsed));
  report(1, "rounded centralized solution vs exhaustive optimum", v);
}

void criterion_dual(const std::vector<TinyInstance>& instances) {
  std::size_t checked = 0, violations = 0;
  double worst = 0.0;
  for (const TinyInstance& inst : instances) {
    const double best = exhaustive_resource_opt(inst)->objective;
    const AlgorithmResult run = qos_distributed(inst.rates, inst.demand, inst.budget, SolverOpts{});
    for (const auto& row : run.trace) {
      ++checked;
      const double shortfall = (best - row.dual_value) / std::max(1.0, std::abs(best));
      worst = std::max(worst, shortfall);
      if (shortfall > 1e-9) ++violations;
    }
  }
  Verdict v;
  v.require(violations == 0, fmt("%zu dual values checked, %zu below the integral optimum (max relative shortfall %.3g)",
                                 checked, violations, worst));
  report(2, "weak duality along the distributed price trace", v);
}

// First instance of the same stream whose relaxed optimum puts at least one
// subband on every BS; optimal prices then sit at 1 + ln y >= 1, within reach
// of the price dynamics. Near-idle picos have prices far below zero that the
// update approaches only logarithmically.
std::optional<TinyInstance> loaded_instance(std::uint64_t& index, double& relaxed) {
  ScenarioConfig cfg;
  cfg.layout.macro_count = 1;
  cfg.layout.picos_per_macrocell = 2;
  SolverOpts exact;
  exact.relaxed_tolerance = 1e-13;
  for (index = 0; index < 100000; ++index) {
    const int users = 2 + static_cast<int>(derive_seed(kTinySeed, 1000000 + index) % 5);
    const Realization r = realize(cfg, users, derive_seed(kTinySeed, index));
    TinyInstance inst{r.rates, r.demand, cfg.budget()};
    if (!exhaustive_resource_opt(inst)) continue;
    const RelaxedSolution sol = solve_relaxed_direct(inst.rates, inst.demand, inst.budget, exact);
    if (std::all_of(sol.loads.begin(), sol.loads.end(), [](double y) { return y >= 1.0; })) {
      relaxed = sol.objective;
      return inst;
    }
  }
  return std::nullopt;
}

void criterion_step_gap() {
  std::uint64_t index = 0;
  double relaxed = 0.0;
  const auto found = loaded_instance(index, relaxed);
  if (!found) {
    Verdict v;
    v.require(false, "no instance with every BS loaded");
    report(3, "dual gap shrinks with the price step", v);
    return;
  }
  const TinyInstance& inst = *found;
  Verdict v;
  v.notes.push_back(fmt("instance draw %llu, %zu users, relaxed optimum %.9f", static_cast<unsigned long long>(index),
                        inst.rates.num_users(), relaxed));
  double previous = std::numeric_limits<double>::infinity();
  const std::pair<double, int> schedule[] = {{0.1, 2000}, {0.01, 20000}, {0.001, 200000}};
  for (auto [step, iterations] : schedule) {
    SolverOpts opts;
    opts.step = step;
    opts.tolerance = 0.0;
    opts.max_iterations = iterations;
    const AlgorithmResult run = qos_distributed(inst.rates, inst.demand, inst.budget, opts);
    double best_dual = std::numeric_limits<double>::infinity();
    for (const auto& row : run.trace) best_dual = std::min(best_dual, row.dual_value);
    const double gap = best_dual - relaxed;
    v.require(gap <= previous + 1e-12 * std::abs(relaxed),
              fmt("step %.3g, %d rounds: min dual - relaxed optimum = %.6g", step, iterations, gap));
    previous = gap;
  }
  report(3, "dual gap shrinks with the price step", v);
}

const SummaryCell& cell(const ExperimentResult& res, int density, Algorithm a, SchedulePolicy p) {
  for (const SummaryCell& c : res.summary)
    if (c.users_per_macrocell == density && c.algorithm == a && c.policy == p) return c;
  throw std::runtime_error("missing summary cell");
}

double standard_error(const SummaryStat& s) {
  return s.count > 1 ? s.stddev / std::sqrt(static_cast<double>(s.count)) : 0.0;
}

double pooled_se(const SummaryStat& a, const SummaryStat& b) {
  return std::hypot(standard_error(a), standard_error(b));
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) rank[idx[t]] = 0.5 * static_cast<double>(i + j) + 1.0;
    i = j + 1;
  }
  return rank;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = average_ranks(a), rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return saa > 0.0 && sbb > 0.0 ? sab / std::sqrt(saa * sbb) : std::numeric_limits<double>::quiet_NaN();
}

const char* name(Algorithm a) { return to_string(a).data(); }
const char* name(SchedulePolicy p) { return to_string(p).data(); }

void criterion_identical(const ExperimentResult& res, const ScenarioConfig& cfg) {
  Verdict v;
  for (SchedulePolicy p : cfg.policies) {
    double diff = 0.0;
    for (int d : cfg.user_densities)
      diff += std::abs(cell(res, d, Algorithm::qos_distributed, p).blocking.mean -
                       cell(res, d, Algorithm::ye_distributed, p).blocking.mean);
    diff /= static_cast<double>(cfg.user_densities.size());
    v.require(diff <= 0.02, fmt("%s: mean |qos - ye| blocking = %.4f", name(p), diff));
  }
  for (Algorithm a : cfg.algorithms) {
    std::string line = fmt("%s MARF vs MPRF blocking:", name(a));
    bool ok = true;
    for (int d : cfg.user_densities) {
      const double marf = cell(res, d, a, SchedulePolicy::marf).blocking.mean;
      const double mprf = cell(res, d, a, SchedulePolicy::mprf).blocking.mean;
      ok = ok && marf < mprf;
      line += fmt(" %d:%.3f/%.3f", d, marf, mprf);
    }
    v.require(ok, line);
  }
  report(4, "identical-demand blocking trend", v);
}

void criterion_blocking(const ExperimentResult& res, const ScenarioConfig& cfg) {
  Verdict v;
  const int low = cfg.user_densities.front();
  for (SchedulePolicy p : cfg.policies) {
    const double ye = cell(res, low, Algorithm::ye_distributed, p).blocking.mean;
    const double mr = cell(res, low, Algorithm::max_rate, p).blocking.mean;
    for (Algorithm a : {Algorithm::qos_distributed, Algorithm::max_probability}) {
      const double b = cell(res, low, a, p).blocking.mean;
      v.require(b <= 0.9 * ye && ye > 0.0,
                fmt("%s density %d: %s %.4f vs ye %.4f (needs <= 90%%)", name(p), low, name(a), b, ye));
    }
    bool worst = true;
    for (Algorithm a : {Algorithm::ye_distributed, Algorithm::qos_distributed, Algorithm::max_probability})
      worst = worst && mr > cell(res, low, a, p).blocking.mean;
    v.require(worst, fmt("%s density %d: max_rate %.4f strictly worst", name(p), low, mr));

    std::vector<double> dens, gap;
    std::string line = fmt("%s gap ye - mean(qos, max_probability):", name(p));
    for (int d : cfg.user_densities) {
      const double g = cell(res, d, Algorithm::ye_distributed, p).blocking.mean -
                       0.5 * (cell(res, d, Algorithm::qos_distributed, p).blocking.mean +
                              cell(res, d, Algorithm::max_probability, p).blocking.mean);
      dens.push_back(d);
      gap.push_back(g);
      line += fmt(" %d:%.4f", d, g);
    }
    const double rho = spearman(dens, gap);
    v.require(rho < 0.0, line + fmt(" (Spearman %.3f)", rho));
  }
  report(5, "distinct-demand blocking trend", v);
}

void criterion_fairness(const ExperimentResult& res, const ScenarioConfig& cfg) {
  Verdict v;
  const Algorithm order[] = {Algorithm::qos_distributed, Algorithm::max_probability, Algorithm::ye_distributed,
                             Algorithm::max_rate};
  for (SchedulePolicy p : cfg.policies) {
    for (int d : cfg.user_densities) {
      std::string line = fmt("%s density %d overall Jain:", name(p), d);
      bool ok = true;
      for (std::size_t i = 0; i < 4; ++i) {
        const SummaryStat& s = cell(res, d, order[i], p).jain_overall;
        line += fmt(" %s %.4f", name(order[i]), s.mean);
        if (i == 0) continue;
        const SummaryStat& prev = cell(res, d, order[i - 1], p).jain_overall;
        ok = ok && prev.mean >= s.mean - pooled_se(prev, s);
      }
      v.require(ok, line);
    }
  }
  for (Algorithm a : cfg.algorithms) {
    std::string line = fmt("%s macro Jain MARF-MPRF:", name(a));
    bool ok = true;
    for (int d : cfg.user_densities) {
      const SummaryStat& marf = cell(res, d, a, SchedulePolicy::marf).jain_macro;
      const SummaryStat& mprf = cell(res, d, a, SchedulePolicy::mprf).jain_macro;
      const double delta = marf.mean - mprf.mean;
      const double se = pooled_se(marf, mprf);
      ok = ok && std::abs(delta) <= se;
      line += fmt(" %d:%+.4f(se %.4f)", d, delta, se);
    }
    v.require(ok, line);
  }
  report(6, "load-balancing index trend", v);
}

int rounds_to_settle(const std::vector<double>& dual) {
  const double final_value = dual.back();
  for (std::size_t t = 0; t < dual.size(); ++t)
    if (std::abs(dual[t] - final_value) <= 1e-3 * std::abs(final_value)) return static_cast<int>(t) + 1;
  return static_cast<int>(dual.size());
}

void criterion_convergence(const ScenarioConfig& cfg) {
  const auto series = emit_convergence(cfg, trial_seed(cfg.master_seed, 0));
  int qos = -1, ye = -1;
  for (const auto& s : series) {
    if (s.algorithm == Algorithm::qos_distributed) qos = rounds_to_settle(s.dual);
    if (s.algorithm == Algorithm::ye_distributed) ye = rounds_to_settle(s.dual);
  }
  Verdict v;
  v.require(qos >= 1 && qos <= 10, fmt("qos dual within 1e-3 of its final value after %d rounds (cap 10)", qos));
  v.require(qos >= 1 && qos < ye, fmt("qos %d rounds vs ye %d rounds", qos, ye));
  report(7, "distributed convergence speed", v);
}

// Compact re-run of the pure-function invariants, 1000 cases each.
void criterion_invariants() {
  Verdict v;
  Rng rng(derive_seed(8, 0));
  constexpr int kCases = 1000;

  auto random_rates = [&](std::size_t nb, std::size_t nu) {
    RateMatrix r{RealMatrix(nb, nu), 180.0};
    for (double& x : r.rates.values()) x = std::exp(rng.uniform(std::log(20.0), std::log(3000.0)));
    return r;
  };
  auto random_demands = [&](std::size_t nu) {
    std::vector<double> d(nu);
    for (double& x : d) x = 2000.0 * rng.uniform_open_closed();
    return d;
  };
  auto random_x = [&](std::size_t nb, std::size_t nu) {
    RealMatrix x(nb, nu);
    for (std::size_t k = 0; k < nu; ++k) {
      double total = 0.0;
      for (std::size_t n = 0; n < nb; ++n) total += x(n, k) = rng.uniform() < 0.3 ? 0.0 : rng.uniform_open_closed();
      if (total == 0.0) {
        x(0, k) = 1.0;
        continue;
      }
      for (std::size_t n = 0; n < nb; ++n) x(n, k) /= total;
    }
    return x;
  };
  auto size = [&](std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng.uniform() * static_cast<double>(hi - lo + 1));
  };

  int bad = 0;
  for (int i = 0; i < kCases; ++i) {
    std::vector<double> loads(size(1, 30));
    for (double& x : loads) x = rng.uniform(0.0, 100.0);
    loads[0] += 1.0;
    const double j = *jain_index(loads);
    const double c = rng.uniform(1e-3, 1e3);
    for (double& x : loads) x *= c;
    if (!(j >= 1.0 / static_cast<double>(loads.size()) - 1e-12 && j <= 1.0 + 1e-12) ||
        std::abs(*jain_index(loads) - j) > 1e-12)
      ++bad;
  }
  v.require(bad == 0, fmt("Jain bounds and scale invariance: %d/%d violations", bad, kCases));

  bad = 0;
  for (int i = 0; i < kCases; ++i) {
    const double mu = rng.uniform(-5.0, 10.0), supply = rng.uniform(0.0, 100.0);
    const double demand = i % 10 == 0 ? supply : rng.uniform(0.0, 100.0);
    const double next = bs_multiplier_update(mu, supply, demand, rng.uniform(1e-4, 1.0));
    const bool ok = demand > supply ? next > mu : demand < supply ? next < mu : next == mu;
    if (!ok) ++bad;
  }
  v.require(bad == 0, fmt("supply-demand sign law: %d/%d violations", bad, kCases));

  bad = 0;
  for (int i = 0; i < kCases; ++i) {
    const std::size_t nb = size(1, 5), nu = size(1, 30);
    const RateMatrix r = random_rates(nb, nu);
    const DemandProfile p = resource_demand(r, random_demands(nu));
    std::vector<std::size_t> serving(nu);
    for (auto& n : serving) n = size(0, nb - 1);
    const Association a = Association::integral(serving, nb, LoadModel::resource, &p);
    const Budget budget{static_cast<int>(size(1, 100))};
    const ScheduleOutcome o = schedule(a, p, budget, i % 2 ? SchedulePolicy::mprf : SchedulePolicy::marf, r);
    for (double c : o.consumed)
      if (c > budget.subbands) ++bad;
  }
  v.require(bad == 0, fmt("scheduler budget safety: %d/%d violations", bad, kCases));

  bad = 0;
  for (int i = 0; i < kCases; ++i) {
    const std::size_t nb = size(1, 5), nu = size(1, 20);
    const RateMatrix r = random_rates(nb, nu);
    const DemandProfile p = resource_demand(r, random_demands(nu));
    std::vector<std::size_t> serving(nu);
    for (auto& n : serving) n = size(0, nb - 1);
    Association a = Association::integral(serving, nb, LoadModel::resource, &p);
    for (int m = 0; m < 10; ++m) a.reassign(size(0, nu - 1), size(0, nb - 1), &p);
    const Association rel = Association::relaxed(random_x(nb, nu), LoadModel::resource, &p);
    bool ok = true;
    for (const Association* as : std::initializer_list<const Association*>{&a, &rel}) {
      const auto expected = resource_loads(as->x(), p);
      for (std::size_t k = 0; k < nu; ++k) {
        double col = 0.0;
        for (std::size_t n = 0; n < nb; ++n) {
          const double x = as->x()(n, k);
          ok = ok && x >= 0.0 && x <= 1.0;
          col += x;
        }
        ok = ok && std::abs(col - 1.0) <= Association::kTolerance;
      }
      for (std::size_t n = 0; n < nb; ++n) ok = ok && std::abs(as->loads()[n] - expected[n]) <= 1e-9 * (1.0 + expected[n]);
    }
    if (!ok) ++bad;
  }
  v.require(bad == 0, fmt("association feasibility closure: %d/%d violations", bad, kCases));

  bad = 0;
  for (int i = 0; i < kCases; ++i) {
    const std::size_t nb = size(2, 5);
    RateMatrix r = random_rates(nb, 1);
    DemandProfile p{{1.0}, RealMatrix(nb, 1)};
    const double s = rng.uniform(0.1, 20.0);
    for (double& x : p.s.values()) x = s;
    std::vector<double> mu(nb);
    for (double& m : mu) m = rng.uniform(-2.0, 8.0);
    const std::size_t before = user_choice_qos(r, p, mu, 0);
    const double c = rng.uniform(1.01, 50.0);
    for (double& x : r.rates.values()) x *= c;
    if (user_choice_qos(r, p, mu, 0) != before) ++bad;
  }
  v.require(bad == 0, fmt("argmax invariance under rate scaling with flat s: %d/%d violations", bad, kCases));

  bad = 0;
  double worst = 0.0;
  for (int i = 0; i < kCases; ++i) {
    const std::size_t nb = size(1, 5), nu = size(1, 20);
    const RateMatrix r = random_rates(nb, nu);
    const DemandProfile p = resource_demand(r, random_demands(nu));
    const RealMatrix x = random_x(nb, nu);
    const double eliminated = objective_resource_based(Association::relaxed(x, LoadModel::resource, &p), r, p);
    const double explicit_loads = objective_resource_with_loads(x, resource_loads(x, p), r, p);
    const double err = std::abs(eliminated - explicit_loads) / std::max(1.0, std::abs(explicit_loads));
    worst = std::max(worst, err);
    if (err > 1e-9) ++bad;
  }
  v.require(bad == 0, fmt("objective with explicit loads equals the eliminated form: %d/%d beyond 1e-9 (max %.2g)",
                          bad, kCases, worst));
  v.notes.push_back("full invariant suites run in the unit_tests target");
  report(8, "invariant suites", v);
}

std::string csv_without_timing(const ExperimentResult& res) {
  std::ostringstream out;
  write_rows_csv(out, res.rows, false);
  return out.str();
}

}  // namespace

int main() {
  const auto start = Clock::now();

  const auto instances = tiny_instances();
  criterion_oracle(instances);
  criterion_dual(instances);
  criterion_step_gap();

  ScenarioConfig identical;
  identical.demand_mode = DemandMode::identical;
  identical.identical_rate_kbps = 1000.0;
  criterion_identical(run_sweep(identical), identical);

  const ScenarioConfig defaults;
  const auto sweep_start = Clock::now();
  const ExperimentResult first = run_sweep(defaults);
  const double sweep_seconds = seconds_since(sweep_start);
  criterion_blocking(first, defaults);
  criterion_fairness(first, defaults);
  criterion_convergence(defaults);
  criterion_invariants();

  const ExperimentResult second = run_sweep(defaults);
  Verdict v;
  v.require(csv_without_timing(first) == csv_without_timing(second),
            fmt("%zu rows, byte-identical CSV across two runs", first.rows.size()));
  v.require(sweep_seconds < 120.0, fmt("default sweep took %.1f s", sweep_seconds));
  report(9, "determinism and sweep runtime", v);

  std::printf("%d of 9 criteria failed; total %.1f s\n", failures, seconds_since(start));
  return failures == 0 ? 0 : 1;
}
