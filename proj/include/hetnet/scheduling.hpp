#pragma once

#include <string_view>
#include <vector>

#include "hetnet/association.hpp"

namespace hetnet {

/// Admission order within a BS queue.
enum class SchedulePolicy {
  mprf,  // descending practical rate d_k
  marf,  // descending achievable rate R_nk
};

std::string_view to_string(SchedulePolicy p) noexcept;
SchedulePolicy parse_policy(std::string_view name);

struct ScheduleOutcome {
  std::vector<std::vector<std::size_t>> served;   // per BS, in admission order
  std::vector<std::vector<std::size_t>> blocked;  // per BS, in queue order
  std::vector<double> consumed;                   // rho_n = sum of served s_nk

  [[nodiscard]] std::size_t served_count() const noexcept;
};

/// Per BS: order the associated users by the policy (ties by user id), admit
/// the longest prefix whose cumulative s_nk fits in M, block the rest.
ScheduleOutcome schedule(const Association& assoc, const DemandProfile& demand, const Budget& budget,
                         SchedulePolicy policy, const RateMatrix& rates);

}  // namespace hetnet
