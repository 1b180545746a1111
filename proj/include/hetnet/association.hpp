#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hetnet/channel.hpp"
#include "hetnet/matrix.hpp"

namespace hetnet {

/// Per-user practical rates d_k (Kbps) and the subbands s_nk = d_k / R_nk they
/// would consume at each BS. s is real-valued (fractional subbands).
struct DemandProfile {
  std::vector<double> d;
  RealMatrix s;

  [[nodiscard]] std::size_t num_users() const noexcept { return d.size(); }
};

/// Subbands available at every BS.
struct Budget {
  int subbands = 100;
};

enum class DemandMode { identical, uniform };

/// Per-user practical rates: `identical_kbps` for all users, or Uniform(0, max_kbps].
std::vector<double> sample_demands(DemandMode mode, std::size_t num_users, std::uint64_t seed,
                                   double identical_kbps = 1000.0, double max_kbps = 2000.0);

/// s_nk = d_k / R_nk. Throws DomainError on non-positive rates or demands.
DemandProfile resource_demand(const RateMatrix& rates, std::span<const double> d);

enum class AssociationMode { integral, relaxed };

/// What y_n counts: associated users, or subbands sum_k x_nk s_nk.
enum class LoadModel { user_count, resource };

/// Assignment of users to base stations. Every factory and mutator keeps
/// sum_n x_nk = 1, 0 <= x_nk <= 1, and y consistent with x.
class Association {
 public:
  static constexpr double kTolerance = 1e-9;

  Association() = default;

  /// One serving BS per user. `demand` is required for LoadModel::resource.
  static Association integral(std::span<const std::size_t> serving, std::size_t num_bs, LoadModel model,
                              const DemandProfile* demand = nullptr);

  /// Relaxed x in [0,1]; throws DomainError when a column does not sum to one.
  static Association relaxed(RealMatrix x, LoadModel model, const DemandProfile* demand = nullptr);

  [[nodiscard]] const RealMatrix& x() const noexcept { return x_; }
  [[nodiscard]] const std::vector<double>& loads() const noexcept { return y_; }
  [[nodiscard]] AssociationMode mode() const noexcept { return mode_; }
  [[nodiscard]] LoadModel load_model() const noexcept { return model_; }
  [[nodiscard]] std::size_t num_bs() const noexcept { return x_.rows(); }
  [[nodiscard]] std::size_t num_users() const noexcept { return x_.cols(); }

  /// Serving BS of user k; for relaxed associations the largest x_nk, lowest
  /// index among entries within kTolerance of the maximum.
  [[nodiscard]] std::size_t serving_bs(std::size_t k) const;
  [[nodiscard]] std::vector<std::size_t> serving() const;

  /// Moves user k to BS n (integral mode only).
  void reassign(std::size_t k, std::size_t n, const DemandProfile* demand = nullptr);

  /// Same x, loads recomputed under another load model.
  [[nodiscard]] Association with_load_model(LoadModel model, const DemandProfile* demand = nullptr) const;

 private:
  void recompute_loads(const DemandProfile* demand);

  RealMatrix x_;
  std::vector<double> y_;
  AssociationMode mode_ = AssociationMode::integral;
  LoadModel model_ = LoadModel::user_count;
};

/// Argmax rounding of a relaxed association (lowest index on ties).
Association round_to_integral(const Association& relaxed, LoadModel model, const DemandProfile* demand = nullptr);

/// e_nk = R_nk / sum_j x_nj s_nj; nullopt for BSs carrying no load.
Matrix<std::optional<double>> load_efficiency(const Association& assoc, const RateMatrix& rates,
                                              const DemandProfile& demand);

/// J(y) = sum_{i=1..y} 1/i. Throws DomainError for y < 1.
double harmonic_gain(long y);

/// Long-term PF throughput T_k = J(y_n) R_nk / y_n with y_n the user count of k's BS.
std::vector<double> pf_throughput(const Association& assoc, const RateMatrix& rates);

/// sum_n sum_k x_nk (log R_nk - log y_n), y_n = sum_k x_nk. Empty BSs contribute 0.
double objective_user_based(const Association& assoc, const RateMatrix& rates);

/// Integral user-based utility including the diversity gain:
/// sum_n sum_k x_nk (log J(y_n) + log R_nk - log y_n).
double objective_user_based_pf(const Association& assoc, const RateMatrix& rates);

/// sum_n sum_k x_nk s_nk (log R_nk - log y_n) with y_n = sum_k x_nk s_nk,
/// evaluated as sum x s log R - sum_n y_n log y_n (0 log 0 = 0).
double objective_resource_based(const Association& assoc, const RateMatrix& rates, const DemandProfile& demand);

/// The same utility with the loads supplied explicitly:
/// sum_n sum_k x_nk s_nk (log R_nk - log loads_n). Terms with x_nk s_nk = 0 are skipped.
double objective_resource_with_loads(const RealMatrix& x, std::span<const double> loads, const RateMatrix& rates,
                                     const DemandProfile& demand);

/// Per-BS subband load sum_k x_nk s_nk.
std::vector<double> resource_loads(const RealMatrix& x, const DemandProfile& demand);

}  // namespace hetnet
