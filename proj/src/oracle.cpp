#include "hetnet/oracle.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "hetnet/error.hpp"


namespace hetnet {

namespace {

std::uint64_t assignment_count(const TinyInstance& inst) {
  const std::size_t num_bs = inst.rates.num_bs();
  const std::size_t num_users = inst.rates.num_users();
  if (num_bs == 0 || num_bs > kOracleMaxBs || num_users > kOracleMaxUsers)
    throw SizeError("oracle instance " + std::to_string(num_bs) + "x" + std::to_string(num_users) +
                    " exceeds the enumeration bound");
  std::uint64_t count = 1;
  for (std::size_t k = 0; k < num_users; ++k) count *= num_bs;
  if (count > kOracleMaxAssignments) throw SizeError("too many assignments to enumerate");
  return count;
}

struct Candidate {
  double objective = -std::numeric_limits<double>::infinity();
  std::uint64_t index = 0;
  bool found = false;

  // higher objective wins; equal objectives keep the lower index
  void offer(double value, std::uint64_t idx) {
    if (!found || value > objective || (value == objective && idx < index)) {
      objective = value;
      index = idx;
      found = true;
    }
  }
};

std::optional<double> resource_value(const TinyInstance& inst, std::uint64_t index) {
  const auto serving = decode_assignment(index, inst.rates.num_bs(), inst.rates.num_users());
  const Association a = Association::integral(serving, inst.rates.num_bs(), LoadModel::resource, &inst.demand);
  for (double y : a.loads())
    if (y > static_cast<double>(inst.budget.subbands)) return std::nullopt;
  return objective_resource_based(a, inst.rates, inst.demand);
}

double user_value(const TinyInstance& inst, std::uint64_t index, UserObjective objective) {
  const auto serving = decode_assignment(index, inst.rates.num_bs(), inst.rates.num_users());
  const Association a = Association::integral(serving, inst.rates.num_bs(), LoadModel::user_count);
  return objective == UserObjective::log_load ? objective_user_based(a, inst.rates)
                                              : objective_user_based_pf(a, inst.rates);
}

template <typename Eval>
Candidate parallel_argmax(std::uint64_t count, Eval eval) {
  Candidate best;
#pragma omp parallel
  {
    Candidate local;
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(count); ++i) {
      const auto idx = static_cast<std::uint64_t>(i);
      if (auto v = eval(idx)) local.offer(*v, idx);
    }
#pragma omp critical
    {
      if (local.found) best.offer(local.objective, local.index);
    }
  }
  return best;
}

}  // namespace

std::vector<std::size_t> decode_assignment(std::uint64_t index, std::size_t num_bs, std::size_t num_users) {
  std::vector<std::size_t> serving(num_users);
  for (std::size_t k = 0; k < num_users; ++k) {
    serving[k] = static_cast<std::size_t>(index % num_bs);
    index /= num_bs;
  }
  return serving;
}

std::optional<OracleResult> exhaustive_resource_opt(const TinyInstance& inst) {
  const std::uint64_t count = assignment_count(inst);
  const Candidate best = parallel_argmax(count, [&](std::uint64_t i) { return resource_value(inst, i); });
  if (!best.found) return std::nullopt;
  const auto serving = decode_assignment(best.index, inst.rates.num_bs(), inst.rates.num_users());
  return OracleResult{Association::integral(serving, inst.rates.num_bs(), LoadModel::resource, &inst.demand),
                      best.objective, best.index};
}

OracleResult exhaustive_user_opt(const TinyInstance& inst, UserObjective objective) {
  const std::uint64_t count = assignment_count(inst);
  const Candidate best = parallel_argmax(
      count, [&](std::uint64_t i) -> std::optional<double> { return user_value(inst, i, objective); });
  const auto serving = decode_assignment(best.index, inst.rates.num_bs(), inst.rates.num_users());
  return OracleResult{Association::integral(serving, inst.rates.num_bs(), LoadModel::user_count), best.objective,
                      best.index};
}

namespace reference {

std::optional<OracleResult> exhaustive_resource_opt(const TinyInstance& inst) {
  const std::uint64_t count = assignment_count(inst);
  Candidate best;
  for (std::uint64_t i = 0; i < count; ++i)
    if (auto v = resource_value(inst, i)) best.offer(*v, i);
  if (!best.found) return std::nullopt;
  const auto serving = decode_assignment(best.index, inst.rates.num_bs(), inst.rates.num_users());
  return OracleResult{Association::integral(serving, inst.rates.num_bs(), LoadModel::resource, &inst.demand),
                      best.objective, best.index};
}

}  // namespace reference

}  // namespace hetnet
