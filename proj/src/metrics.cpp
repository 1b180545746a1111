#include "hetnet/metrics.hpp"

#include "hetnet/error.hpp"

namespace hetnet {

double call_blocking(const ScheduleOutcome& outcome, std::size_t num_users) {
  if (num_users == 0) throw DomainError("call blocking needs at least one user");
  return 1.0 - static_cast<double>(outcome.served_count()) / static_cast<double>(num_users);
}

std::optional<double> jain_index(std::span<const double> loads) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : loads) {
    sum += v;
    sum_sq += v * v;
  }
  if (loads.empty() || !(sum_sq > 0.0)) return std::nullopt;
  return sum * sum / (static_cast<double>(loads.size()) * sum_sq);
}

std::optional<double> jain_macro(const ScheduleOutcome& outcome, const Topology& topology) {
  return jain_index(std::span<const double>(outcome.consumed).first(topology.num_macro()));
}

MetricSet compute_metrics(const ScheduleOutcome& outcome, const Topology& topology, double total_utility) {
  MetricSet m;
  m.served_count = outcome.served_count();
  m.blocking = call_blocking(outcome, topology.num_users());
  m.jain_overall = jain_index(outcome.consumed);
  m.jain_macro = jain_macro(outcome, topology);
  m.total_utility = total_utility;
  return m;
}

}  // namespace hetnet
