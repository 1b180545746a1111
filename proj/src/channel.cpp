#include "hetnet/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hetnet/error.hpp"
#include "hetnet/rng.hpp"

namespace hetnet {

namespace {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kContainSlack = 1e-9;

std::vector<Point> hexagonal_sites(int count, double radius) {
  int rings = 0;
  while (1 + 3 * rings * (rings + 1) < count) ++rings;
  std::vector<Point> sites;
  for (int q = -rings; q <= rings; ++q) {
    for (int r = -rings; r <= rings; ++r) {
      if (std::abs(q + r) > rings) continue;
      sites.push_back({kSqrt3 * radius * (q + 0.5 * r), 1.5 * radius * r});
    }
  }
  return sites;
}

std::vector<Point> square_sites(int count, double half_side) {
  int rings = 0;
  while ((2 * rings + 1) * (2 * rings + 1) < count) ++rings;
  std::vector<Point> sites;
  for (int i = -rings; i <= rings; ++i)
    for (int j = -rings; j <= rings; ++j) sites.push_back({2.0 * half_side * i, 2.0 * half_side * j});
  return sites;
}

// Innermost `count` lattice sites ordered by (distance, angle) from the origin.
std::vector<Point> macro_grid(GridLayout layout, int count, double radius) {
  auto sites = layout == GridLayout::hexagonal ? hexagonal_sites(count, radius) : square_sites(count, radius);
  auto key = [radius](Point p) {
    const double d = std::round(std::hypot(p.x, p.y) / radius * 1e6);
    double a = std::atan2(p.y, p.x);
    if (a < -1e-12) a += 2.0 * std::numbers::pi;
    return std::pair{d, std::round(a * 1e9)};
  };
  std::stable_sort(sites.begin(), sites.end(), [&](Point a, Point b) { return key(a) < key(b); });
  sites.resize(static_cast<std::size_t>(count));
  return sites;
}

bool in_cell(GridLayout layout, Point center, double radius, Point p) noexcept {
  const double dx = std::abs(p.x - center.x);
  const double dy = std::abs(p.y - center.y);
  if (layout == GridLayout::square) return dx <= radius + kContainSlack && dy <= radius + kContainSlack;
  return dx <= 0.5 * kSqrt3 * radius + kContainSlack && dx / kSqrt3 + dy <= radius + kContainSlack;
}

Point sample_in_cell(GridLayout layout, Point center, double radius, Rng& rng) {
  const double half_w = layout == GridLayout::hexagonal ? 0.5 * kSqrt3 * radius : radius;
  for (;;) {
    const Point p{center.x + rng.uniform(-half_w, half_w), center.y + rng.uniform(-radius, radius)};
    if (in_cell(layout, center, radius, p)) return p;
  }
}

}  // namespace

double distance(Point a, Point b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

double PropagationParams::wavelength_m() const noexcept { return kSpeedOfLight / carrier_hz; }

Point Topology::bs_position(std::size_t bs) const {
  return bs < macro_sites.size() ? macro_sites[bs] : pico_sites.at(bs - macro_sites.size());
}

bool Topology::cell_contains(std::size_t cell, Point p) const noexcept {
  return in_cell(layout, macro_sites[cell], cell_radius_m, p);
}

bool Topology::contains(Point p) const noexcept {
  for (std::size_t c = 0; c < macro_sites.size(); ++c)
    if (cell_contains(c, p)) return true;
  return false;
}

Topology generate_topology(const LayoutParams& layout, const RadioParams& radio, std::uint64_t seed) {
  if (!(layout.cell_radius_m > 0.0) || !std::isfinite(layout.cell_radius_m))
    throw ConfigError("cell radius must be positive, got " + std::to_string(layout.cell_radius_m));
  if (layout.macro_count < 1) throw ConfigError("macro_count must be >= 1");
  if (layout.picos_per_macrocell < 0) throw ConfigError("picos_per_macrocell must be >= 0");
  if (layout.users_per_macrocell < 1) throw ConfigError("users_per_macrocell must be >= 1");

  Topology topo;
  topo.layout = layout.layout;
  topo.cell_radius_m = layout.cell_radius_m;
  topo.tx_power_macro_dbm = radio.tx_power_macro_dbm;
  topo.tx_power_pico_dbm = radio.tx_power_pico_dbm;
  topo.macro_sites = macro_grid(layout.layout, layout.macro_count, layout.cell_radius_m);

  Rng rng(derive_seed(seed, kTopologyStream));
  for (const Point& center : topo.macro_sites) {
    for (int i = 0; i < layout.picos_per_macrocell; ++i)
      topo.pico_sites.push_back(sample_in_cell(layout.layout, center, layout.cell_radius_m, rng));
    for (int i = 0; i < layout.users_per_macrocell; ++i)
      topo.users.push_back(sample_in_cell(layout.layout, center, layout.cell_radius_m, rng));
  }
  return topo;
}

double path_loss_db(double d, Tier tier, const PropagationParams& params) {
  if (!(d > 0.0)) throw DomainError("path loss distance must be positive, got " + std::to_string(d));
  const TierPropagation& tp = params.tier(tier);
  const double dist = std::max(d, tp.reference_distance_m);
  return 20.0 * std::log10(4.0 * std::numbers::pi * dist / params.wavelength_m()) +
         10.0 * tp.exponent * std::log10(dist / tp.reference_distance_m);
}

double dbm_to_mw(double dbm) noexcept { return std::pow(10.0, dbm / 10.0); }

std::vector<double> subband_powers_mw(const Topology& topology, const RadioParams& radio) {
  const double split_db = 10.0 * std::log10(static_cast<double>(radio.num_subbands));
  std::vector<double> p(topology.num_bs());
  for (std::size_t n = 0; n < p.size(); ++n) {
    const double total = topology.tier(n) == Tier::macro ? topology.tx_power_macro_dbm : topology.tx_power_pico_dbm;
    p[n] = dbm_to_mw(total - split_db);
  }
  return p;
}

double subband_noise_mw(const RadioParams& radio) {
  return dbm_to_mw(radio.noise_density_dbm_hz + 10.0 * std::log10(radio.subband_khz * 1e3));
}

// A user sampled exactly on a site would leave the path loss domain; the
// model clamps to d0 anyway, so any positive floor gives the same loss.
static double link_distance(const Topology& topology, std::size_t n, std::size_t k) {
  return std::max(distance(topology.bs_position(n), topology.users[k]), 1e-3);
}

ChannelRealization realize_channel(const Topology& topology, const PropagationParams& params,
                                   std::uint64_t seed) {
  const std::size_t num_bs = topology.num_bs();
  const std::size_t num_users = topology.num_users();
  ChannelRealization ch;
  ch.seed = seed;
  ch.shadowing_db = RealMatrix(num_bs, num_users);
  ch.gains = RealMatrix(num_bs, num_users);
  const std::uint64_t stream = derive_seed(seed, kShadowingStream);
  const auto rows = static_cast<std::ptrdiff_t>(num_bs);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t row = 0; row < rows; ++row) {
    const auto n = static_cast<std::size_t>(row);
    const TierPropagation& tp = params.tier(topology.tier(n));
    Rng rng(derive_seed(stream, n));
    auto shadow = ch.shadowing_db.row(n);
    auto gain = ch.gains.row(n);
    for (std::size_t k = 0; k < num_users; ++k) {
      shadow[k] = tp.shadowing_std_db * rng.normal();
      const double loss = path_loss_db(link_distance(topology, n, k), topology.tier(n), params) + shadow[k];
      gain[k] = std::pow(10.0, -loss / 10.0);
    }
  }
  return ch;
}

RealMatrix compute_sinr(const RealMatrix& gains, std::span<const double> powers_mw, double noise_mw) {
  const std::size_t num_bs = gains.rows();
  const std::size_t num_users = gains.cols();
  RealMatrix sinr(num_bs, num_users);
  const auto cols = static_cast<std::ptrdiff_t>(num_users);

#pragma omp parallel
  {
    std::vector<double> prefix(num_bs + 1);
    std::vector<double> suffix(num_bs + 1);
#pragma omp for schedule(static)
    for (std::ptrdiff_t col = 0; col < cols; ++col) {
      const auto k = static_cast<std::size_t>(col);
      // interference excluding n = prefix[n] + suffix[n + 1]; no cancellation
      prefix[0] = 0.0;
      for (std::size_t n = 0; n < num_bs; ++n) prefix[n + 1] = prefix[n] + powers_mw[n] * gains(n, k);
      suffix[num_bs] = 0.0;
      for (std::size_t n = num_bs; n-- > 0;) suffix[n] = suffix[n + 1] + powers_mw[n] * gains(n, k);
      for (std::size_t n = 0; n < num_bs; ++n)
        sinr(n, k) = powers_mw[n] * gains(n, k) / (prefix[n] + suffix[n + 1] + noise_mw);
    }
  }
  return sinr;
}

RealMatrix compute_rate(const RealMatrix& sinr, double subband_khz) {
  RealMatrix rate(sinr.rows(), sinr.cols());
  auto out = rate.values();
  auto in = sinr.values();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = subband_khz * std::log2(1.0 + in[i]);
  return rate;
}

RateMatrix effective_rate(const RealMatrix& rbar, double epsilon, double subband_khz) {
  if (!(epsilon > 0.0)) throw DomainError("rate floor epsilon must be positive");
  RateMatrix out{RealMatrix(rbar.rows(), rbar.cols()), subband_khz};
  auto dst = out.rates.values();
  auto src = rbar.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::max(src[i], epsilon);
  return out;
}

RateMatrix achievable_rates(const Topology& topology, const ChannelRealization& channel,
                            const RadioParams& radio, double epsilon) {
  const auto powers = subband_powers_mw(topology, radio);
  const RealMatrix sinr = compute_sinr(channel.gains, powers, subband_noise_mw(radio));
  return effective_rate(compute_rate(sinr, radio.subband_khz), epsilon, radio.subband_khz);
}

namespace reference {

RealMatrix sample_shadowing(const Topology& topology, const PropagationParams& params, std::uint64_t seed) {
  RealMatrix shadow(topology.num_bs(), topology.num_users());
  const std::uint64_t stream = derive_seed(seed, kShadowingStream);
  for (std::size_t n = 0; n < topology.num_bs(); ++n) {
    Rng rng(derive_seed(stream, n));
    const double sd = params.tier(topology.tier(n)).shadowing_std_db;
    for (std::size_t k = 0; k < topology.num_users(); ++k) shadow(n, k) = sd * rng.normal();
  }
  return shadow;
}

RealMatrix link_gains(const Topology& topology, const PropagationParams& params, const RealMatrix& shadowing_db) {
  RealMatrix g(topology.num_bs(), topology.num_users());
  for (std::size_t n = 0; n < g.rows(); ++n)
    for (std::size_t k = 0; k < g.cols(); ++k) {
      const double loss = path_loss_db(link_distance(topology, n, k), topology.tier(n), params);
      g(n, k) = std::pow(10.0, -(loss + shadowing_db(n, k)) / 10.0);
    }
  return g;
}

RealMatrix compute_sinr(const RealMatrix& gains, std::span<const double> powers_mw, double noise_mw) {
  RealMatrix sinr(gains.rows(), gains.cols());
  for (std::size_t k = 0; k < gains.cols(); ++k)
    for (std::size_t n = 0; n < gains.rows(); ++n) {
      double interference = 0.0;
      for (std::size_t j = 0; j < gains.rows(); ++j)
        if (j != n) interference += powers_mw[j] * gains(j, k);
      sinr(n, k) = powers_mw[n] * gains(n, k) / (interference + noise_mw);
    }
  return sinr;
}

}  // namespace reference

}  // namespace hetnet
