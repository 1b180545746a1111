#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hetnet/matrix.hpp"

namespace hetnet {

enum class Tier { macro, pico };
enum class GridLayout { hexagonal, square };

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

double distance(Point a, Point b) noexcept;

/// Placement of the macro grid and the random tiers.
struct LayoutParams {
  GridLayout layout = GridLayout::hexagonal;
  int macro_count = 7;
  double cell_radius_m = 500.0;  // hexagon circumradius, or half side of a square cell
  int picos_per_macrocell = 3;
  int users_per_macrocell = 10;
};

/// Transmit side and resource grid.
struct RadioParams {
  double tx_power_macro_dbm = 46.0;
  double tx_power_pico_dbm = 20.0;
  double noise_density_dbm_hz = -174.0;
  double bandwidth_mhz = 20.0;
  double subband_khz = 180.0;
  int num_subbands = 100;
};

struct TierPropagation {
  double reference_distance_m;
  double exponent;
  double shadowing_std_db;
};

/// Log-distance path loss with a free-space reference segment plus
/// lognormal shadowing, one parameter set per transmitter tier.
struct PropagationParams {
  double carrier_hz = 2.0e9;
  TierPropagation macro{50.0, 3.0, 8.0};
  TierPropagation pico{1.0, 3.5, 10.0};

  [[nodiscard]] double wavelength_m() const noexcept;
  [[nodiscard]] const TierPropagation& tier(Tier t) const noexcept {
    return t == Tier::macro ? macro : pico;
  }
};

/// Two-tier deployment. Base station indices run over macro sites first,
/// then pico sites.
struct Topology {
  GridLayout layout = GridLayout::hexagonal;
  double cell_radius_m = 0.0;
  std::vector<Point> macro_sites;
  std::vector<Point> pico_sites;
  std::vector<Point> users;
  double tx_power_macro_dbm = 46.0;
  double tx_power_pico_dbm = 20.0;

  [[nodiscard]] std::size_t num_bs() const noexcept { return macro_sites.size() + pico_sites.size(); }
  [[nodiscard]] std::size_t num_macro() const noexcept { return macro_sites.size(); }
  [[nodiscard]] std::size_t num_users() const noexcept { return users.size(); }
  [[nodiscard]] Tier tier(std::size_t bs) const noexcept {
    return bs < macro_sites.size() ? Tier::macro : Tier::pico;
  }
  [[nodiscard]] Point bs_position(std::size_t bs) const;

  /// True when p lies in the cell of macro site `cell`.
  [[nodiscard]] bool cell_contains(std::size_t cell, Point p) const noexcept;
  /// True when p lies in the union of all macrocells.
  [[nodiscard]] bool contains(Point p) const noexcept;
};

struct ChannelRealization {
  RealMatrix gains;         // linear power gain g_nk
  RealMatrix shadowing_db;  // sampled shadowing per link
  std::uint64_t seed = 0;
};

/// Long-term achievable rates R_nk (Kbps), floored at a positive epsilon.
struct RateMatrix {
  RealMatrix rates;
  double subband_width_khz = 180.0;

  [[nodiscard]] std::size_t num_bs() const noexcept { return rates.rows(); }
  [[nodiscard]] std::size_t num_users() const noexcept { return rates.cols(); }
  double operator()(std::size_t n, std::size_t k) const { return rates(n, k); }
};

/// Macro sites on the configured grid; picos and users i.i.d. uniform in each
/// macrocell. Throws ConfigError on an invalid layout.
Topology generate_topology(const LayoutParams& layout, const RadioParams& radio, std::uint64_t seed);

/// PL(d) = 20 log10(4 pi d / lambda) + 10 n log10(d / d0), with d clamped up to d0.
/// Throws DomainError for d <= 0.
double path_loss_db(double d, Tier tier, const PropagationParams& params);

ChannelRealization realize_channel(const Topology& topology, const PropagationParams& params,
                                   std::uint64_t seed);

/// SINR_nk = p_n g_nk / (sum_{j != n} p_j g_jk + noise).
RealMatrix compute_sinr(const RealMatrix& gains, std::span<const double> powers_mw, double noise_mw);

/// r_nk = W log2(1 + SINR_nk), W in kHz, result in Kbps.
RealMatrix compute_rate(const RealMatrix& sinr, double subband_khz);

/// R_nk = max(rbar_nk, epsilon).
RateMatrix effective_rate(const RealMatrix& rbar, double epsilon, double subband_khz = 180.0);

double dbm_to_mw(double dbm) noexcept;

/// Per-subband transmit power of every BS, total power split evenly over the subbands.
std::vector<double> subband_powers_mw(const Topology& topology, const RadioParams& radio);

/// Thermal noise over one subband.
double subband_noise_mw(const RadioParams& radio);

/// Full pipeline: SINR, Shannon rate per subband, epsilon floor.
RateMatrix achievable_rates(const Topology& topology, const ChannelRealization& channel,
                            const RadioParams& radio, double epsilon);

namespace reference {

// Single-threaded versions of the channel kernels, kept as test oracles.
RealMatrix link_gains(const Topology& topology, const PropagationParams& params, const RealMatrix& shadowing_db);
RealMatrix sample_shadowing(const Topology& topology, const PropagationParams& params, std::uint64_t seed);
RealMatrix compute_sinr(const RealMatrix& gains, std::span<const double> powers_mw, double noise_mw);

}  // namespace reference

}  // namespace hetnet
