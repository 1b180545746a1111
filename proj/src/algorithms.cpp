#include "hetnet/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hetnet/error.hpp"

namespace hetnet {

namespace {

constexpr double kMaxExponent = 700.0;

RealMatrix log_matrix(const RealMatrix& m) {
  RealMatrix out(m.rows(), m.cols());
  auto src = m.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::log(src[i]);
  return out;
}

double capped_exp(double z) { return std::exp(std::min(z, kMaxExponent)); }

std::size_t best_candidate(const RealMatrix& log_rates, const RealMatrix* weights, std::span<const double> mu,
                           std::size_t k) {
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < log_rates.rows(); ++n) {
    const double w = weights != nullptr ? (*weights)(n, k) : 1.0;
    const double value = w * (log_rates(n, k) - mu[n]);
    if (value > best_value) {
      best_value = value;
      best = n;
    }
  }
  return best;
}

// H(mu) = sum_k max_n w_nk (log R_nk - mu_n)
double dual_user_term(const RealMatrix& log_rates, const RealMatrix* weights, std::span<const double> mu) {
  double h = 0.0;
  for (std::size_t k = 0; k < log_rates.cols(); ++k) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < log_rates.rows(); ++n) {
      const double w = weights != nullptr ? (*weights)(n, k) : 1.0;
      best = std::max(best, w * (log_rates(n, k) - mu[n]));
    }
    h += best;
  }
  return h;
}

// max_{0 < y <= cap} y (mu - log y); attained at y = min(e^{mu-1}, cap)
double dual_bs_term(double mu, std::optional<double> cap) {
  const double y = cap ? std::min(capped_exp(mu - 1.0), *cap) : capped_exp(mu - 1.0);
  return y * (mu - std::log(y));
}

double dual_from_logs(const RealMatrix& log_rates, const RealMatrix* weights, std::span<const double> mu,
                      std::optional<double> cap) {
  double g = dual_user_term(log_rates, weights, mu);
  for (double m : mu) g += dual_bs_term(m, cap);
  return g;
}

void check_shapes(const RateMatrix& rates, const DemandProfile* demand) {
  if (rates.num_bs() == 0) throw SolverError("no base stations");
  if (demand != nullptr && (demand->s.rows() != rates.num_bs() || demand->s.cols() != rates.num_users()))
    throw SolverError("demand profile shape does not match rate matrix");
}

// Synchronous rounds of the price protocol: users best-respond to mu, each BS
// sets its supply from its price and moves the price by the supply/demand gap.
AlgorithmResult price_protocol(Algorithm algorithm, const RateMatrix& rates, const DemandProfile* demand,
                               std::optional<double> cap, double initial_price, const SolverOpts& opts) {
  if (!(opts.step > 0.0)) throw ConfigError("step size must be positive");
  if (opts.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  const std::size_t num_bs = rates.num_bs();
  const std::size_t num_users = rates.num_users();
  const RealMatrix log_rates = log_matrix(rates.rates);
  const RealMatrix* weights = demand != nullptr ? &demand->s : nullptr;

  AlgorithmResult result;
  result.algorithm = algorithm;
  result.counters.per_bs_touches.assign(num_bs, 0);

  std::vector<double> mu(num_bs, initial_price);
  std::vector<std::size_t> choice(num_users, 0);
  std::vector<std::vector<std::size_t>> members(num_bs);
  std::vector<double> supply(num_bs), served(num_bs);
  double previous_dual = 0.0;

  for (int t = 0; t < opts.max_iterations; ++t) {
    kernels::choose_users(log_rates, weights, mu, choice);
    result.counters.user_candidate_evals += static_cast<std::uint64_t>(num_bs) * num_users;

    for (auto& m : members) m.clear();
    for (std::size_t k = 0; k < num_users; ++k) members[choice[k]].push_back(k);
    for (std::size_t n = 0; n < num_bs; ++n) {
      double d = 0.0;
      for (std::size_t k : members[n]) d += weights != nullptr ? (*weights)(n, k) : 1.0;
      result.counters.bs_user_touches += members[n].size();
      result.counters.per_bs_touches[n] += members[n].size();
      served[n] = d;
      supply[n] = cap ? std::min(capped_exp(mu[n] - 1.0), *cap) : capped_exp(mu[n] - 1.0);
    }
    ++result.counters.rounds;

    const double dual = dual_from_logs(log_rates, weights, mu, cap);
    const LoadModel model = demand != nullptr ? LoadModel::resource : LoadModel::user_count;
    Association assoc = Association::integral(choice, num_bs, model, demand);
    IterationTrace row;
    row.iteration = t;
    row.dual_value = dual;
    row.primal_objective =
        demand != nullptr ? objective_resource_based(assoc, rates, *demand) : objective_user_based(assoc, rates);
    row.supply = supply;
    row.demand = served;
    row.mu = mu;
    result.trace.push_back(std::move(row));
    result.association = std::move(assoc);
    result.iterations = t + 1;

    if (t > 0 && std::abs(dual - previous_dual) <= opts.tolerance * std::abs(previous_dual)) {
      result.converged = true;
      break;
    }
    previous_dual = dual;
    for (std::size_t n = 0; n < num_bs; ++n) mu[n] = bs_multiplier_update(mu[n], supply[n], served[n], opts.step);
  }
  return result;
}

}  // namespace

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::max_rate: return "max_rate";
    case Algorithm::ye_distributed: return "ye_distributed";
    case Algorithm::qos_distributed: return "qos_distributed";
    case Algorithm::max_probability: return "max_probability";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::max_rate, Algorithm::ye_distributed, Algorithm::qos_distributed,
                      Algorithm::max_probability})
    if (to_string(a) == name) return a;
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

double default_initial_price(const Budget& budget) {
  return 1.0 + std::log(static_cast<double>(budget.subbands) / 2.0);
}

AlgorithmResult max_rate_assoc(const RateMatrix& rates) {
  check_shapes(rates, nullptr);
  std::vector<std::size_t> serving(rates.num_users(), 0);
  for (std::size_t k = 0; k < serving.size(); ++k)
    for (std::size_t n = 1; n < rates.num_bs(); ++n)
      if (rates(n, k) > rates(serving[k], k)) serving[k] = n;

  AlgorithmResult result;
  result.algorithm = Algorithm::max_rate;
  result.association = Association::integral(serving, rates.num_bs(), LoadModel::user_count);
  IterationTrace row;
  row.primal_objective = objective_user_based(result.association, rates);
  row.dual_value = row.primal_objective;
  row.supply = result.association.loads();
  row.demand = result.association.loads();
  result.trace.push_back(std::move(row));
  result.converged = true;
  result.iterations = 1;
  return result;
}

std::size_t user_choice_qos(const RateMatrix& rates, const DemandProfile& demand, std::span<const double> mu,
                            std::size_t k) {
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < rates.num_bs(); ++n) {
    const double value = demand.s(n, k) * (std::log(rates(n, k)) - mu[n]);
    if (value > best_value) {
      best_value = value;
      best = n;
    }
  }
  return best;
}

std::size_t user_choice_ye(const RateMatrix& rates, std::span<const double> mu, std::size_t k) {
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < rates.num_bs(); ++n) {
    const double value = std::log(rates(n, k)) - mu[n];
    if (value > best_value) {
      best_value = value;
      best = n;
    }
  }
  return best;
}

double bs_load_update(double mu, const Budget& budget) {
  return std::min(std::exp(mu - 1.0), static_cast<double>(budget.subbands));
}

double bs_multiplier_update(double mu, double supply, double served_demand, double step) {
  return mu - step * (supply - served_demand);
}

double dual_value(std::span<const double> mu, const RateMatrix& rates, const DemandProfile& demand,
                  const Budget& budget) {
  return dual_from_logs(log_matrix(rates.rates), &demand.s, mu, static_cast<double>(budget.subbands));
}

double dual_value_user_based(std::span<const double> mu, const RateMatrix& rates) {
  return dual_from_logs(log_matrix(rates.rates), nullptr, mu, std::nullopt);
}

AlgorithmResult qos_distributed(const RateMatrix& rates, const DemandProfile& demand, const Budget& budget,
                                const SolverOpts& opts) {
  check_shapes(rates, &demand);
  if (budget.subbands <= 0) throw ConfigError("subband budget must be positive");
  return price_protocol(Algorithm::qos_distributed, rates, &demand, static_cast<double>(budget.subbands),
                        opts.initial_price.value_or(default_initial_price(budget)), opts);
}

AlgorithmResult ye_distributed(const RateMatrix& rates, const SolverOpts& opts) {
  check_shapes(rates, nullptr);
  return price_protocol(Algorithm::ye_distributed, rates, nullptr, std::nullopt,
                        opts.initial_price.value_or(default_initial_price(Budget{})), opts);
}

AlgorithmResult max_probability(const RateMatrix& rates, const DemandProfile& demand, const Budget& budget,
                                const SolverOpts& opts) {
  check_shapes(rates, &demand);
  if (budget.subbands <= 0) throw ConfigError("subband budget must be positive");
  RelaxedSolution relaxed = opts.centralized == CentralizedMethod::direct
                                ? solve_relaxed_direct(rates, demand, budget, opts)
                                : solve_relaxed_primal_dual(rates, demand, budget, opts);
  AlgorithmResult result;
  result.algorithm = Algorithm::max_probability;
  Association probabilities = Association::relaxed(std::move(relaxed.x), LoadModel::resource, &demand);
  result.association = round_to_integral(probabilities, LoadModel::resource, &demand);
  result.relaxed = std::move(probabilities);
  result.relaxed_objective = relaxed.objective;
  result.relaxed_dual_bound = relaxed.dual_bound;
  result.budget_feasible = relaxed.budget_feasible;
  result.converged = relaxed.converged;
  result.iterations = relaxed.sweeps;
  result.trace = std::move(relaxed.trace);
  return result;
}

AlgorithmResult run_algorithm(Algorithm algorithm, const RateMatrix& rates, const DemandProfile& demand,
                              const Budget& budget, const SolverOpts& opts) {
  switch (algorithm) {
    case Algorithm::max_rate: return max_rate_assoc(rates);
    case Algorithm::ye_distributed: {
      SolverOpts o = opts;
      if (!o.initial_price) o.initial_price = default_initial_price(budget);
      return ye_distributed(rates, o);
    }
    case Algorithm::qos_distributed: return qos_distributed(rates, demand, budget, opts);
    case Algorithm::max_probability: return max_probability(rates, demand, budget, opts);
  }
  throw ConfigError("unknown algorithm");
}

namespace kernels {

void choose_users(const RealMatrix& log_rates, const RealMatrix* weights, std::span<const double> mu,
                  std::span<std::size_t> choice) {
  const auto num_users = static_cast<std::ptrdiff_t>(log_rates.cols());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < num_users; ++k)
    choice[static_cast<std::size_t>(k)] = best_candidate(log_rates, weights, mu, static_cast<std::size_t>(k));
}

}  // namespace kernels

namespace reference {

void choose_users(const RealMatrix& log_rates, const RealMatrix* weights, std::span<const double> mu,
                  std::span<std::size_t> choice) {
  for (std::size_t k = 0; k < log_rates.cols(); ++k) {
    std::size_t best = 0;
    for (std::size_t n = 1; n < log_rates.rows(); ++n) {
      const double w_best = weights != nullptr ? (*weights)(best, k) : 1.0;
      const double w = weights != nullptr ? (*weights)(n, k) : 1.0;
      if (w * (log_rates(n, k) - mu[n]) > w_best * (log_rates(best, k) - mu[best])) best = n;
    }
    choice[k] = best;
  }
}

}  // namespace reference

}  // namespace hetnet
