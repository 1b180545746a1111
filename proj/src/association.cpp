#include "hetnet/association.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hetnet/error.hpp"
#include "hetnet/rng.hpp"

namespace hetnet {

std::vector<double> sample_demands(DemandMode mode, std::size_t num_users, std::uint64_t seed,
                                   double identical_kbps, double max_kbps) {
  std::vector<double> d(num_users, identical_kbps);
  if (mode == DemandMode::uniform) {
    Rng rng(derive_seed(seed, kDemandStream));
    for (auto& v : d) v = max_kbps * rng.uniform_open_closed();
  }
  return d;
}

DemandProfile resource_demand(const RateMatrix& rates, std::span<const double> d) {
  if (d.size() != rates.num_users()) throw DomainError("demand vector size does not match user count");
  for (double v : d)
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("practical rates must be positive and finite");
  DemandProfile out{{d.begin(), d.end()}, RealMatrix(rates.num_bs(), rates.num_users())};
  for (std::size_t n = 0; n < rates.num_bs(); ++n)
    for (std::size_t k = 0; k < rates.num_users(); ++k) {
      const double r = rates(n, k);
      if (!(r > 0.0) || !std::isfinite(r))
        throw DomainError("achievable rate R(" + std::to_string(n) + "," + std::to_string(k) + ") must be positive");
      out.s(n, k) = d[k] / r;
    }
  return out;
}

Association Association::integral(std::span<const std::size_t> serving, std::size_t num_bs, LoadModel model,
                                  const DemandProfile* demand) {
  Association a;
  a.x_ = RealMatrix(num_bs, serving.size());
  for (std::size_t k = 0; k < serving.size(); ++k) {
    if (serving[k] >= num_bs) throw DomainError("serving BS index out of range");
    a.x_(serving[k], k) = 1.0;
  }
  a.mode_ = AssociationMode::integral;
  a.model_ = model;
  a.recompute_loads(demand);
  return a;
}

Association Association::relaxed(RealMatrix x, LoadModel model, const DemandProfile* demand) {
  for (std::size_t k = 0; k < x.cols(); ++k) {
    double sum = 0.0;
    for (std::size_t n = 0; n < x.rows(); ++n) {
      const double v = x(n, k);
      if (!(v >= -kTolerance && v <= 1.0 + kTolerance)) throw DomainError("association entries must lie in [0,1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kTolerance)
      throw DomainError("user " + std::to_string(k) + " association does not sum to one");
  }
  Association a;
  a.x_ = std::move(x);
  for (auto& v : a.x_.values()) v = std::clamp(v, 0.0, 1.0);
  a.mode_ = AssociationMode::relaxed;
  a.model_ = model;
  a.recompute_loads(demand);
  return a;
}

void Association::recompute_loads(const DemandProfile* demand) {
  if (model_ == LoadModel::resource) {
    if (demand == nullptr) throw DomainError("resource loads need a demand profile");
    if (demand->s.rows() != x_.rows() || demand->s.cols() != x_.cols())
      throw DomainError("demand profile shape does not match association");
    y_ = resource_loads(x_, *demand);
    return;
  }
  y_.assign(x_.rows(), 0.0);
  for (std::size_t n = 0; n < x_.rows(); ++n)
    for (double v : x_.row(n)) y_[n] += v;
}

std::size_t Association::serving_bs(std::size_t k) const {
  std::size_t best = 0;
  for (std::size_t n = 1; n < x_.rows(); ++n)
    if (x_(n, k) > x_(best, k) + kTolerance) best = n;
  return best;
}

std::vector<std::size_t> Association::serving() const {
  std::vector<std::size_t> out(num_users());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = serving_bs(k);
  return out;
}

void Association::reassign(std::size_t k, std::size_t n, const DemandProfile* demand) {
  if (mode_ != AssociationMode::integral) throw DomainError("reassign needs an integral association");
  if (n >= num_bs() || k >= num_users()) throw DomainError("reassign index out of range");
  if (model_ == LoadModel::resource && demand == nullptr) throw DomainError("resource loads need a demand profile");
  const std::size_t old = serving_bs(k);
  x_(old, k) = 0.0;
  x_(n, k) = 1.0;
  if (model_ == LoadModel::resource) {
    // recompute rather than add/subtract so y stays bit-identical to a fresh build
    recompute_loads(demand);
  } else {
    y_[old] -= 1.0;
    y_[n] += 1.0;
  }
}

Association Association::with_load_model(LoadModel model, const DemandProfile* demand) const {
  Association a = *this;
  a.model_ = model;
  a.recompute_loads(demand);
  return a;
}

Association round_to_integral(const Association& relaxed, LoadModel model, const DemandProfile* demand) {
  const auto serving = relaxed.serving();
  return Association::integral(serving, relaxed.num_bs(), model, demand);
}

std::vector<double> resource_loads(const RealMatrix& x, const DemandProfile& demand) {
  std::vector<double> y(x.rows(), 0.0);
  for (std::size_t n = 0; n < x.rows(); ++n)
    for (std::size_t k = 0; k < x.cols(); ++k) y[n] += x(n, k) * demand.s(n, k);
  return y;
}

Matrix<std::optional<double>> load_efficiency(const Association& assoc, const RateMatrix& rates,
                                              const DemandProfile& demand) {
  const auto y = resource_loads(assoc.x(), demand);
  Matrix<std::optional<double>> e(assoc.num_bs(), assoc.num_users());
  for (std::size_t n = 0; n < e.rows(); ++n) {
    if (!(y[n] > 0.0)) continue;
    for (std::size_t k = 0; k < e.cols(); ++k) e(n, k) = rates(n, k) / y[n];
  }
  return e;
}

double harmonic_gain(long y) {
  if (y < 1) throw DomainError("diversity gain needs at least one user");
  double j = 0.0;
  for (long i = y; i >= 1; --i) j += 1.0 / static_cast<double>(i);
  return j;
}

std::vector<double> pf_throughput(const Association& assoc, const RateMatrix& rates) {
  if (assoc.mode() != AssociationMode::integral) throw DomainError("PF throughput needs an integral association");
  const auto serving = assoc.serving();
  std::vector<long> count(assoc.num_bs(), 0);
  for (auto n : serving) ++count[n];
  std::vector<double> t(serving.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    const long y = count[serving[k]];
    t[k] = harmonic_gain(y) * rates(serving[k], k) / static_cast<double>(y);
  }
  return t;
}

double objective_user_based(const Association& assoc, const RateMatrix& rates) {
  const RealMatrix& x = assoc.x();
  double total = 0.0;
  for (std::size_t n = 0; n < x.rows(); ++n) {
    double y = 0.0;
    for (double v : x.row(n)) y += v;
    if (!(y > 0.0)) continue;
    const double log_y = std::log(y);
    for (std::size_t k = 0; k < x.cols(); ++k)
      if (x(n, k) > 0.0) total += x(n, k) * (std::log(rates(n, k)) - log_y);
  }
  return total;
}

double objective_user_based_pf(const Association& assoc, const RateMatrix& rates) {
  if (assoc.mode() != AssociationMode::integral) throw DomainError("diversity-gain utility needs an integral association");
  const auto serving = assoc.serving();
  std::vector<long> count(assoc.num_bs(), 0);
  for (auto n : serving) ++count[n];
  double total = 0.0;
  for (std::size_t k = 0; k < serving.size(); ++k) {
    const long y = count[serving[k]];
    total += std::log(harmonic_gain(y)) + std::log(rates(serving[k], k)) - std::log(static_cast<double>(y));
  }
  return total;
}

double objective_resource_based(const Association& assoc, const RateMatrix& rates, const DemandProfile& demand) {
  const RealMatrix& x = assoc.x();
  double total = 0.0;
  for (std::size_t n = 0; n < x.rows(); ++n) {
    double y = 0.0;
    double weighted = 0.0;
    for (std::size_t k = 0; k < x.cols(); ++k) {
      const double w = x(n, k) * demand.s(n, k);
      if (w > 0.0) {
        y += w;
        weighted += w * std::log(rates(n, k));
      }
    }
    if (y > 0.0) total += weighted - y * std::log(y);
  }
  return total;
}

double objective_resource_with_loads(const RealMatrix& x, std::span<const double> loads, const RateMatrix& rates,
                                     const DemandProfile& demand) {
  double total = 0.0;
  for (std::size_t n = 0; n < x.rows(); ++n)
    for (std::size_t k = 0; k < x.cols(); ++k) {
      const double w = x(n, k) * demand.s(n, k);
      if (w > 0.0) total += w * (std::log(rates(n, k)) - std::log(loads[n]));
    }
  return total;
}

}  // namespace hetnet
