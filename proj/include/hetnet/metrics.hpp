#pragma once

#include <optional>
#include <span>

#include "hetnet/channel.hpp"
#include "hetnet/scheduling.hpp"

namespace hetnet {

struct MetricSet {
  double blocking = 0.0;
  std::optional<double> jain_overall;
  std::optional<double> jain_macro;
  double total_utility = 0.0;
  std::size_t served_count = 0;
};

/// 1 - served / K.
double call_blocking(const ScheduleOutcome& outcome, std::size_t num_users);

/// (sum rho)^2 / (N sum rho^2); nullopt when every load is zero or the set is empty.
std::optional<double> jain_index(std::span<const double> loads);

/// Jain index over the macro BSs' consumed resources only.
std::optional<double> jain_macro(const ScheduleOutcome& outcome, const Topology& topology);

MetricSet compute_metrics(const ScheduleOutcome& outcome, const Topology& topology, double total_utility);

}  // namespace hetnet
