// Relaxed resource-based association.
//
// The direct solver maximizes
//   f(x) = sum_nk x_nk s_nk log R_nk - sum_n y_n log y_n,   y_n = sum_k x_nk s_nk
// over the product of per-user simplices subject to y_n <= M. The budget is
// handled by an augmented Lagrangian with multipliers beta_n (capped at
// kMaxBudgetPrice, which turns the method into an exact penalty when the
// budget cannot be met). Each subproblem is solved by cyclic exact
// maximization over one user's column at a time.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hetnet/algorithms.hpp"
#include "hetnet/error.hpp"

namespace hetnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxBudgetPrice = 1e3;
constexpr double kInitialPenalty = 0.1;
constexpr double kMaxPenalty = 1e4;
constexpr double kExactPenaltyStiffness = 1e-3;
constexpr int kMaxInnerSweeps = 50;
constexpr double kFeasibilityTol = 1e-9;  // relative to M

struct LoadCost {
  double budget;
  double beta;
  double rho;

  double penalty_slope(double y) const { return std::max(0.0, beta + rho * (y - budget)); }
  // g(y) = y log y + (max(0, beta + rho (y - M))^2 - beta^2) / (2 rho)
  double value(double y) const {
    const double p = penalty_slope(y);
    const double ylogy = y > 0.0 ? y * std::log(y) : 0.0;
    return ylogy + (p * p - beta * beta) / (2.0 * rho);
  }
  double slope(double y) const { return y > 0.0 ? std::log(y) + 1.0 + penalty_slope(y) : -kInf; }
  double curvature(double y) const { return 1.0 / y + (beta + rho * (y - budget) > 0.0 ? rho : 0.0); }

  // y in [lo, hi] with slope(y) = c, given slope(lo) < c < slope(hi).
  double invert(double c, double lo, double hi) const {
    const double free = std::exp(c - 1.0);
    if (beta + rho * (free - budget) <= 0.0) return std::clamp(free, lo, hi);
    double a = std::max({lo, budget - beta / rho, std::numeric_limits<double>::min()});
    double b = std::min(hi, free);
    double y = b;
    for (int it = 0; it < 100; ++it) {
      const double f = slope(y) - c;
      if (f > 0.0) b = y; else a = y;
      if (f == 0.0 || b - a <= 1e-15 * b) break;
      double next = y - f / curvature(y);
      if (!(next > a && next < b)) next = 0.5 * (a + b);
      y = next;
    }
    return y;
  }
};

struct BlockSolver {
  const RealMatrix& log_rates;
  const RealMatrix& s;
  std::vector<LoadCost> costs;

  // Thresholds for BS n given load Y from other users: x_n(tau) = 1 for
  // tau <= t1, 0 for tau >= t0, interior in between.
  struct Candidate {
    std::size_t n;
    double others;  // Y_n
    double t0;
    double t1;
  };
  std::vector<Candidate> candidates;
  std::vector<Candidate> active;

  double share(const Candidate& c, double tau, std::size_t k, double* derivative) const {
    const double sn = s(c.n, k);
    if (tau >= c.t0) return 0.0;
    if (tau <= c.t1) {
      if (derivative) *derivative -= 1.0 / (sn * sn * costs[c.n].curvature(c.others + sn));
      return 1.0;
    }
    const double target = log_rates(c.n, k) - tau / sn;
    const double y = costs[c.n].invert(target, c.others, c.others + sn);
    if (derivative) *derivative -= 1.0 / (sn * sn * costs[c.n].curvature(y));
    return std::clamp((y - c.others) / sn, 0.0, 1.0);
  }

  // Exact maximizer of user k's column given the other users' loads.
  void solve(std::size_t k, std::span<const double> loads, std::span<double> column) {
    const std::size_t num_bs = loads.size();
    candidates.clear();
    std::size_t lead = 0;
    for (std::size_t n = 0; n < num_bs; ++n) {
      const double sn = s(n, k);
      const double others = std::max(0.0, loads[n] - column[n] * sn);
      Candidate c{n, others, kInf, 0.0};
      if (others > 0.0) c.t0 = sn * (log_rates(n, k) - costs[n].slope(others));
      c.t1 = sn * (log_rates(n, k) - costs[n].slope(others + sn));
      candidates.push_back(c);
      if (c.t1 > candidates[lead].t1) lead = n;
    }
    const double tau_lo = candidates[lead].t1;
    active.clear();
    for (const auto& c : candidates)
      if (c.n == lead || c.t0 > tau_lo) active.push_back(c);

    std::fill(column.begin(), column.end(), 0.0);
    if (active.size() == 1) {
      column[lead] = 1.0;
      return;
    }
    // Sum of shares is decreasing in tau; Newton from the left, falling back to
    // bisection once a step overshoots (the penalty kink breaks convexity).
    double tau = tau_lo;
    double lo = tau_lo;
    double hi = kInf;
    for (int it = 0; it < 200; ++it) {
      double derivative = 0.0;
      double total = 0.0;
      for (const auto& c : active) total += share(c, tau, k, &derivative);
      const double excess = total - 1.0;
      if (std::abs(excess) <= 1e-14) break;
      if (excess > 0.0) lo = tau; else hi = tau;
      if (hi - lo <= 1e-15 * std::max(1.0, std::abs(lo))) break;
      double next = derivative < 0.0 ? tau - excess / derivative : kInf;
      if (!(next > lo && next < hi)) next = std::isfinite(hi) ? 0.5 * (lo + hi) : lo + std::max(1.0, std::abs(lo));
      tau = next;
    }
    if (std::isfinite(hi) && tau > lo) {
      // keep the side whose shares still cover the column
      double total = 0.0;
      for (const auto& c : active) total += share(c, tau, k, nullptr);
      if (total < 1.0 - 1e-9) tau = lo;
    }
    double total = 0.0;
    for (const auto& c : active) {
      column[c.n] = share(c, tau, k, nullptr);
      total += column[c.n];
    }
    if (!(total > 0.0)) {
      column[lead] = 1.0;
      return;
    }
    for (const auto& c : active) column[c.n] = std::min(1.0, column[c.n] / total);
  }
};

std::vector<std::size_t> max_rate_serving(const RateMatrix& rates) {
  std::vector<std::size_t> serving(rates.num_users(), 0);
  for (std::size_t k = 0; k < serving.size(); ++k)
    for (std::size_t n = 1; n < rates.num_bs(); ++n)
      if (rates(n, k) > rates(serving[k], k)) serving[k] = n;
  return serving;
}

double relaxed_utility(const RealMatrix& x, const RealMatrix& log_rates, const RealMatrix& s,
                       std::span<const double> loads) {
  double total = 0.0;
  for (std::size_t n = 0; n < x.rows(); ++n) {
    for (std::size_t k = 0; k < x.cols(); ++k)
      if (x(n, k) > 0.0) total += x(n, k) * s(n, k) * log_rates(n, k);
    if (loads[n] > 0.0) total -= loads[n] * std::log(loads[n]);
  }
  return total;
}

// sum_k [max_n s (a - price) - sum_n x s (a - price)]: zero iff every user best-responds.
double best_response_gap(const RealMatrix& x, const RealMatrix& log_rates, const RealMatrix& s,
                         std::span<const double> price) {
  double gap = 0.0;
  for (std::size_t k = 0; k < x.cols(); ++k) {
    double best = -kInf;
    double current = 0.0;
    for (std::size_t n = 0; n < x.rows(); ++n) {
      const double v = s(n, k) * (log_rates(n, k) - price[n]);
      best = std::max(best, v);
      if (x(n, k) > 0.0) current += x(n, k) * v;
    }
    gap += best - current;
  }
  return gap;
}

double dual_at(std::span<const double> price, const RealMatrix& log_rates, const RealMatrix& s, double budget) {
  double g = 0.0;
  for (std::size_t k = 0; k < log_rates.cols(); ++k) {
    double best = -kInf;
    for (std::size_t n = 0; n < log_rates.rows(); ++n) best = std::max(best, s(n, k) * (log_rates(n, k) - price[n]));
    g += best;
  }
  for (double mu : price) {
    const double y = std::min(std::exp(std::min(mu - 1.0, 700.0)), budget);
    g += y * (mu - std::log(y));
  }
  return g;
}

void validate_inputs(const RateMatrix& rates, const DemandProfile& demand, const Budget& budget) {
  if (rates.num_bs() == 0 || rates.num_users() == 0) throw SolverError("relaxed solve needs at least one BS and one user");
  if (budget.subbands <= 0) throw SolverError("subband budget must be positive");
  for (double v : rates.rates.values())
    if (!(v > 0.0) || !std::isfinite(v)) throw SolverError("rates must be positive and finite");
  for (double v : demand.s.values())
    if (!(v > 0.0) || !std::isfinite(v)) throw SolverError("subband demands must be positive and finite");
}

Association rounded(const RealMatrix& x, const DemandProfile& demand) {
  std::vector<std::size_t> serving(x.cols(), 0);
  for (std::size_t k = 0; k < x.cols(); ++k)
    for (std::size_t n = 1; n < x.rows(); ++n)
      if (x(n, k) > x(serving[k], k) + Association::kTolerance) serving[k] = n;
  return Association::integral(serving, x.rows(), LoadModel::resource, &demand);
}

}  // namespace

RelaxedSolution solve_relaxed_direct(const RateMatrix& rates, const DemandProfile& demand, const Budget& budget,
                                     const SolverOpts& opts) {
  validate_inputs(rates, demand, budget);
  if (opts.relaxed_max_sweeps < 1) throw ConfigError("relaxed_max_sweeps must be >= 1");
  const std::size_t num_bs = rates.num_bs();
  const std::size_t num_users = rates.num_users();
  const double cap = static_cast<double>(budget.subbands);
  const RealMatrix& s = demand.s;
  RealMatrix log_rates(num_bs, num_users);
  for (std::size_t i = 0; i < log_rates.values().size(); ++i) log_rates.values()[i] = std::log(rates.rates.values()[i]);

  RelaxedSolution sol;
  sol.x = RealMatrix(num_bs, num_users);
  {
    const auto serving = max_rate_serving(rates);
    for (std::size_t k = 0; k < num_users; ++k) sol.x(serving[k], k) = 1.0;
  }

  std::vector<double> beta(num_bs, 0.0);
  double rho = kInitialPenalty;
  BlockSolver block{log_rates, s, std::vector<LoadCost>(num_bs, LoadCost{cap, 0.0, rho}), {}, {}};
  std::vector<double> loads = resource_loads(sol.x, demand);
  std::vector<double> column(num_bs);
  std::vector<double> price(num_bs);
  double previous_violation = kInf;
  bool exact_penalty = false;

  auto current_prices = [&](std::span<double> out) {
    for (std::size_t n = 0; n < num_bs; ++n) out[n] = block.costs[n].slope(loads[n]);
  };

  while (sol.sweeps < opts.relaxed_max_sweeps) {
    for (std::size_t n = 0; n < num_bs; ++n) block.costs[n] = LoadCost{cap, beta[n], rho};

    // inner: cyclic block maximization of the augmented objective
    bool no_progress = false;
    bool inner_converged = false;
    double previous_utility = -kInf;
    for (int inner = 1;; ++inner) {
      for (std::size_t k = 0; k < num_users; ++k) {
        for (std::size_t n = 0; n < num_bs; ++n) column[n] = sol.x(n, k);
        block.solve(k, loads, column);
        for (std::size_t n = 0; n < num_bs; ++n) {
          loads[n] = std::max(0.0, loads[n] + (column[n] - sol.x(n, k)) * s(n, k));
          sol.x(n, k) = column[n];
        }
      }
      loads = resource_loads(sol.x, demand);
      ++sol.sweeps;

      current_prices(price);
      const double inner_gap = best_response_gap(sol.x, log_rates, s, price);
      const double utility = relaxed_utility(sol.x, log_rates, s, loads);

      // true prices: log y + 1 + budget multiplier
      const double dual = dual_at(price, log_rates, s, cap);
      IterationTrace row;
      row.iteration = sol.sweeps - 1;
      row.dual_value = dual;
      row.relaxed_objective = utility;
      Association r = rounded(sol.x, demand);
      row.primal_objective = objective_resource_based(r, rates, demand);
      row.supply = r.loads();
      row.demand = loads;
      row.mu = price;
      sol.trace.push_back(std::move(row));

      const double scale = std::max(1.0, std::abs(utility));
      no_progress = std::abs(utility - previous_utility) <= 1e-14 * scale;
      previous_utility = utility;
      inner_converged = inner_gap <= 0.1 * opts.relaxed_tolerance * scale;
      if (inner_converged || no_progress || sol.sweeps >= opts.relaxed_max_sweeps) break;
      if (!exact_penalty && inner >= kMaxInnerSweeps) break;
    }

    double violation = 0.0;
    for (double y : loads) violation = std::max(violation, y - cap);
    sol.objective = relaxed_utility(sol.x, log_rates, s, loads);
    current_prices(price);
    sol.dual_bound = dual_at(price, log_rates, s, cap);
    sol.max_violation = std::max(0.0, violation);
    sol.budget_feasible = violation <= kFeasibilityTol * cap;
    const double scale = std::max(1.0, std::abs(sol.objective));
    if (sol.budget_feasible && sol.dual_bound - sol.objective <= opts.relaxed_tolerance * scale) {
      sol.converged = true;
      break;
    }
    // rounding noise floor: the sweep no longer moves and the budget holds
    if (sol.budget_feasible && no_progress) break;
    if (exact_penalty) {
      sol.converged = inner_converged || no_progress;
      break;
    }

    bool saturated = false;
    for (std::size_t n = 0; n < num_bs; ++n) {
      beta[n] = std::clamp(beta[n] + rho * (loads[n] - cap), 0.0, kMaxBudgetPrice);
      if (loads[n] - cap > kFeasibilityTol * cap && beta[n] >= kMaxBudgetPrice) saturated = true;
    }
    // A price at the cap means the budget cannot be met; finish with the
    // capped prices as a plain exact penalty instead of an ever stiffer quadratic.
    if (saturated) {
      exact_penalty = true;
      rho = kExactPenaltyStiffness;
      continue;
    }
    if (violation > 0.25 * previous_violation) rho = std::min(rho * 4.0, kMaxPenalty);
    previous_violation = violation;
  }
  sol.loads = std::move(loads);
  return sol;
}

RelaxedSolution solve_relaxed_primal_dual(const RateMatrix& rates, const DemandProfile& demand, const Budget& budget,
                                          const SolverOpts& opts) {
  validate_inputs(rates, demand, budget);
  const std::size_t num_bs = rates.num_bs();
  const std::size_t num_users = rates.num_users();
  const double cap = static_cast<double>(budget.subbands);
  const RealMatrix& s = demand.s;
  const auto [xi_gamma, xi_lambda, xi_mu, xi_nu] = opts.primal_dual_steps;

  MultiplierState m;
  m.gamma.assign(num_users, 0.0);
  m.lambda.assign(num_bs, 0.0);
  m.mu.assign(num_bs, 0.0);
  m.nu = RealMatrix(num_bs, num_users);

  RealMatrix x(num_bs, num_users);
  {
    const auto serving = max_rate_serving(rates);
    for (std::size_t k = 0; k < num_users; ++k) x(serving[k], k) = 1.0;
  }
  std::vector<double> y(num_bs, 0.0);

  RelaxedSolution sol;
  for (int t = 0; t < opts.max_iterations; ++t) {
    // KKT closed forms. The per-pair load expressions are reconciled by their
    // geometric mean over users.
    for (std::size_t n = 0; n < num_bs; ++n) {
      double log_sum = 0.0;
      for (std::size_t k = 0; k < num_users; ++k)
        log_sum += std::log(rates(n, k)) - (m.gamma[k] + m.lambda[n] * s(n, k) + m.nu(n, k)) / s(n, k);
      y[n] = std::exp(std::clamp(log_sum / static_cast<double>(num_users), -700.0, 700.0));
    }
    double change = 0.0;
    for (std::size_t n = 0; n < num_bs; ++n)
      for (std::size_t k = 0; k < num_users; ++k) {
        const double next = std::max(0.0, (m.lambda[n] - m.mu[n]) * y[n] / s(n, k));
        change = std::max(change, std::abs(next - x(n, k)));
        x(n, k) = next;
      }

    for (std::size_t k = 0; k < num_users; ++k) {
      double col = 0.0;
      for (std::size_t n = 0; n < num_bs; ++n) col += x(n, k);
      m.gamma[k] -= xi_gamma * (1.0 - col);
    }
    for (std::size_t n = 0; n < num_bs; ++n) {
      double served = 0.0;
      for (std::size_t k = 0; k < num_users; ++k) served += s(n, k) * x(n, k);
      m.lambda[n] -= xi_lambda * (y[n] - served);
      m.mu[n] = std::max(0.0, m.mu[n] - xi_mu * (cap - y[n]));
      for (std::size_t k = 0; k < num_users; ++k) m.nu(n, k) = std::max(0.0, m.nu(n, k) - xi_nu * (1.0 - x(n, k)));
    }

    IterationTrace row;
    row.iteration = t;
    double lagrangian = objective_resource_with_loads(x, y, rates, demand);
    for (std::size_t k = 0; k < num_users; ++k) {
      double col = 0.0;
      for (std::size_t n = 0; n < num_bs; ++n) col += x(n, k);
      lagrangian += m.gamma[k] * (1.0 - col);
    }
    for (std::size_t n = 0; n < num_bs; ++n) {
      double served = 0.0;
      for (std::size_t k = 0; k < num_users; ++k) {
        served += s(n, k) * x(n, k);
        lagrangian += m.nu(n, k) * (1.0 - x(n, k));
      }
      lagrangian += m.lambda[n] * (y[n] - served) + m.mu[n] * (cap - y[n]);
    }
    row.dual_value = lagrangian;
    row.primal_objective = objective_resource_based(rounded(x, demand), rates, demand);
    row.supply = y;
    row.demand = resource_loads(x, demand);
    row.mu = m.mu;
    sol.trace.push_back(std::move(row));
    sol.sweeps = t + 1;
    if (t > 0 && change <= opts.tolerance) {
      sol.converged = true;
      break;
    }
  }

  // probabilities: columns renormalized onto the simplex (uniform where all entries vanished)
  for (std::size_t k = 0; k < num_users; ++k) {
    double col = 0.0;
    for (std::size_t n = 0; n < num_bs; ++n) col += x(n, k);
    for (std::size_t n = 0; n < num_bs; ++n)
      x(n, k) = col > 0.0 ? x(n, k) / col : 1.0 / static_cast<double>(num_bs);
  }
  sol.x = std::move(x);
  sol.loads = resource_loads(sol.x, demand);
  sol.objective = objective_resource_based(Association::relaxed(sol.x, LoadModel::resource, &demand), rates, demand);
  sol.dual_bound = sol.trace.empty() ? sol.objective : sol.trace.back().dual_value;
  double violation = 0.0;
  for (double v : sol.loads) violation = std::max(violation, v - cap);
  sol.max_violation = std::max(0.0, violation);
  sol.budget_feasible = violation <= kFeasibilityTol * cap;
  return sol;
}

}  // namespace hetnet
