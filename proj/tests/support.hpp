#pragma once

#include <cmath>
#include <vector>

#include "hetnet/association.hpp"
#include "hetnet/channel.hpp"
#include "hetnet/rng.hpp"

namespace hetnet::testing {

inline RateMatrix make_rates(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
  RateMatrix r{RealMatrix(rows, cols), 180.0};
  std::size_t i = 0;
  for (double v : values) r.rates.values()[i++] = v;
  return r;
}

/// Rates log-uniform in [lo, hi] Kbps.
inline RateMatrix random_rates(Rng& rng, std::size_t num_bs, std::size_t num_users, double lo = 50.0,
                               double hi = 3000.0) {
  RateMatrix r{RealMatrix(num_bs, num_users), 180.0};
  for (double& v : r.rates.values()) v = std::exp(rng.uniform(std::log(lo), std::log(hi)));
  return r;
}

inline std::vector<double> random_demands(Rng& rng, std::size_t num_users, double max_kbps = 2000.0) {
  std::vector<double> d(num_users);
  for (double& v : d) v = max_kbps * rng.uniform_open_closed();
  return d;
}

/// Random point on the product of simplices, with some exact zeros.
inline RealMatrix random_relaxed_x(Rng& rng, std::size_t num_bs, std::size_t num_users) {
  RealMatrix x(num_bs, num_users);
  for (std::size_t k = 0; k < num_users; ++k) {
    double total = 0.0;
    for (std::size_t n = 0; n < num_bs; ++n) {
      x(n, k) = rng.uniform() < 0.3 ? 0.0 : rng.uniform_open_closed();
      total += x(n, k);
    }
    if (total == 0.0) {
      x(0, k) = 1.0;
      continue;
    }
    for (std::size_t n = 0; n < num_bs; ++n) x(n, k) /= total;
  }
  return x;
}

inline std::vector<std::size_t> random_serving(Rng& rng, std::size_t num_bs, std::size_t num_users) {
  std::vector<std::size_t> serving(num_users);
  for (auto& n : serving) n = static_cast<std::size_t>(rng.uniform() * static_cast<double>(num_bs));
  return serving;
}

}  // namespace hetnet::testing
