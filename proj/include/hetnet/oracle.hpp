#pragma once

#include <cstdint>
#include <optional>

#include "hetnet/association.hpp"

namespace hetnet {

/// Small enough for exhaustive enumeration: N <= 4, K <= 8, N^K <= 65536.
struct TinyInstance {
  RateMatrix rates;
  DemandProfile demand;
  Budget budget;
};

inline constexpr std::size_t kOracleMaxBs = 4;
inline constexpr std::size_t kOracleMaxUsers = 8;
inline constexpr std::uint64_t kOracleMaxAssignments = 65536;

struct OracleResult {
  Association association;
  double objective = 0.0;
  std::uint64_t assignment_index = 0;  // base-N digits, user 0 least significant
};

enum class UserObjective {
  log_load,       // sum x (log R - log y)
  diversity_gain, // sum x (log J(y) + log R - log y)
};

/// Best budget-feasible integral assignment for the resource-based utility;
/// nullopt when no assignment satisfies every budget. Throws SizeError.
std::optional<OracleResult> exhaustive_resource_opt(const TinyInstance& inst);

/// Best integral assignment for a user-based utility (no budget).
OracleResult exhaustive_user_opt(const TinyInstance& inst, UserObjective objective);

/// Assignment with the given enumeration index.
std::vector<std::size_t> decode_assignment(std::uint64_t index, std::size_t num_bs, std::size_t num_users);

namespace reference {

std::optional<OracleResult> exhaustive_resource_opt(const TinyInstance& inst);

}  // namespace reference

}  // namespace hetnet
