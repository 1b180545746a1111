#include "hetnet/scheduling.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "hetnet/error.hpp"

namespace hetnet {

std::string_view to_string(SchedulePolicy p) noexcept { return p == SchedulePolicy::mprf ? "mprf" : "marf"; }

SchedulePolicy parse_policy(std::string_view name) {
  if (name == "mprf") return SchedulePolicy::mprf;
  if (name == "marf") return SchedulePolicy::marf;
  throw ConfigError("unknown scheduling policy '" + std::string(name) + "'");
}

std::size_t ScheduleOutcome::served_count() const noexcept {
  std::size_t total = 0;
  for (const auto& v : served) total += v.size();
  return total;
}

ScheduleOutcome schedule(const Association& assoc, const DemandProfile& demand, const Budget& budget,
                         SchedulePolicy policy, const RateMatrix& rates) {
  if (assoc.mode() != AssociationMode::integral) throw DomainError("scheduling needs an integral association");
  const std::size_t num_bs = assoc.num_bs();
  const double cap = static_cast<double>(budget.subbands);

  std::vector<std::vector<std::size_t>> queue(num_bs);
  const auto serving = assoc.serving();
  for (std::size_t k = 0; k < serving.size(); ++k) queue[serving[k]].push_back(k);

  ScheduleOutcome out;
  out.served.resize(num_bs);
  out.blocked.resize(num_bs);
  out.consumed.assign(num_bs, 0.0);
  for (std::size_t n = 0; n < num_bs; ++n) {
    auto& q = queue[n];
    auto key = [&](std::size_t k) { return policy == SchedulePolicy::mprf ? demand.d[k] : rates(n, k); };
    // queue is built in ascending user id, so a stable sort keeps id order on ties
    std::stable_sort(q.begin(), q.end(), [&](std::size_t a, std::size_t b) { return key(a) > key(b); });
    std::size_t admitted = 0;
    double used = 0.0;
    while (admitted < q.size() && used + demand.s(n, q[admitted]) <= cap) {
      used += demand.s(n, q[admitted]);
      ++admitted;
    }
    out.served[n].assign(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(admitted));
    out.blocked[n].assign(q.begin() + static_cast<std::ptrdiff_t>(admitted), q.end());
    out.consumed[n] = used;
  }
  return out;
}

}  // namespace hetnet
