#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hetnet/association.hpp"
#include "hetnet/channel.hpp"

namespace hetnet {

enum class Algorithm { max_rate, ye_distributed, qos_distributed, max_probability };

std::string_view to_string(Algorithm a) noexcept;
/// Throws ConfigError on an unknown name.
Algorithm parse_algorithm(std::string_view name);

/// How max_probability solves its relaxed problem.
enum class CentralizedMethod {
  direct,       // block-coordinate ascent on the y-eliminated concave form with an augmented Lagrangian budget
  primal_dual,  // closed-form KKT updates with gradient steps on all four multiplier families
};

struct SolverOpts {
  double step = 0.01;  // price step for the distributed algorithms
  double tolerance = 1e-3;  // relative change of the dual value between rounds
  int max_iterations = 200;
  std::optional<double> initial_price;  // defaults to 1 + ln(M / 2)

  CentralizedMethod centralized = CentralizedMethod::direct;
  double relaxed_tolerance = 1e-5;  // relative duality gap for the direct solver
  int relaxed_max_sweeps = 4000;
  std::array<double, 4> primal_dual_steps{0.01, 0.01, 0.01, 0.01};
};

/// Prices and, for the primal-dual centralized solver, the remaining multiplier families.
struct MultiplierState {
  std::vector<double> mu;
  std::vector<double> gamma;
  std::vector<double> lambda;
  RealMatrix nu;
};

struct IterationTrace {
  int iteration = 0;
  double dual_value = 0.0;
  double primal_objective = 0.0;  // utility of the current integral association
  std::optional<double> relaxed_objective;
  std::vector<double> supply;  // y_n
  std::vector<double> demand;  // sum_k s_nk x_nk (user counts for the user-based protocol)
  std::vector<double> mu;
};

/// Work counters for the distributed protocol.
struct OpCounters {
  std::uint64_t user_candidate_evals = 0;  // per user, one per candidate BS
  std::uint64_t bs_user_touches = 0;       // per BS, one per associated user
  std::vector<std::uint64_t> per_bs_touches;
  std::uint64_t rounds = 0;
};

struct AlgorithmResult {
  Algorithm algorithm = Algorithm::max_rate;
  Association association;  // integral, one BS per user
  std::vector<IterationTrace> trace;
  bool converged = false;
  int iterations = 0;

  // max_probability only
  std::optional<Association> relaxed;
  std::optional<double> relaxed_objective;
  std::optional<double> relaxed_dual_bound;
  bool budget_feasible = true;

  OpCounters counters;
};

/// Each user to argmax_n R_nk, lowest index on ties.
AlgorithmResult max_rate_assoc(const RateMatrix& rates);

/// n* = argmax_n s_nk (log R_nk - mu_n), lowest index on ties.
std::size_t user_choice_qos(const RateMatrix& rates, const DemandProfile& demand, std::span<const double> mu,
                            std::size_t k);

/// n* = argmax_n (log R_nk - mu_n), lowest index on ties.
std::size_t user_choice_ye(const RateMatrix& rates, std::span<const double> mu, std::size_t k);

/// y_n = min(exp(mu_n - 1), M).
double bs_load_update(double mu, const Budget& budget);

/// mu' = mu - step (supply - served_demand).
double bs_multiplier_update(double mu, double supply, double served_demand, double step);

/// G(mu) = H(mu) + I(mu) for the resource-based problem:
/// H = sum_k max_n s_nk (log R_nk - mu_n), I = sum_n max_{0 < y <= M} y (mu_n - log y).
double dual_value(std::span<const double> mu, const RateMatrix& rates, const DemandProfile& demand,
                  const Budget& budget);

/// Dual of the user-based problem (s = 1, uncapped loads).
double dual_value_user_based(std::span<const double> mu, const RateMatrix& rates);

AlgorithmResult qos_distributed(const RateMatrix& rates, const DemandProfile& demand, const Budget& budget,
                                const SolverOpts& opts);

AlgorithmResult ye_distributed(const RateMatrix& rates, const SolverOpts& opts);

/// Solves the relaxed resource-based problem, then rounds each user to its
/// most probable BS. Throws SolverError on degenerate input.
AlgorithmResult max_probability(const RateMatrix& rates, const DemandProfile& demand, const Budget& budget,
                                const SolverOpts& opts);

AlgorithmResult run_algorithm(Algorithm algorithm, const RateMatrix& rates, const DemandProfile& demand,
                              const Budget& budget, const SolverOpts& opts);

double default_initial_price(const Budget& budget);

/// Relaxed solution of the resource-based problem.
struct RelaxedSolution {
  RealMatrix x;
  std::vector<double> loads;
  double objective = 0.0;
  double dual_bound = 0.0;  // G at the recovered prices; >= the relaxed optimum when budget_feasible
  double max_violation = 0.0;  // max_n (y_n - M)+
  bool budget_feasible = true;
  bool converged = false;
  int sweeps = 0;
  std::vector<IterationTrace> trace;
};

RelaxedSolution solve_relaxed_direct(const RateMatrix& rates, const DemandProfile& demand, const Budget& budget,
                                     const SolverOpts& opts);

RelaxedSolution solve_relaxed_primal_dual(const RateMatrix& rates, const DemandProfile& demand, const Budget& budget,
                                          const SolverOpts& opts);

namespace kernels {

/// Best BS per user under prices mu; `weights` is s (resource-based) or empty
/// (user-based, unit weights). `log_rates` holds log R_nk. Parallel over users.
void choose_users(const RealMatrix& log_rates, const RealMatrix* weights, std::span<const double> mu,
                  std::span<std::size_t> choice);

}  // namespace kernels

namespace reference {

void choose_users(const RealMatrix& log_rates, const RealMatrix* weights, std::span<const double> mu,
                  std::span<std::size_t> choice);

}  // namespace reference

}  // namespace hetnet
