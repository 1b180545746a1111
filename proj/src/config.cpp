#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "hetnet/error.hpp"
#include "hetnet/experiment.hpp"

namespace hetnet {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw ConfigError("invalid value '" + value + "' for key '" + key + "'");
  return out;
}

using Setter = std::function<void(ScenarioConfig&, const std::string& key, const std::string& value)>;

Setter real(double ScenarioConfig::*field) {
  return [field](ScenarioConfig& c, const std::string& k, const std::string& v) { c.*field = parse_number<double>(k, v); };
}

template <typename Getter>
Setter real_at(Getter get) {
  return [get](ScenarioConfig& c, const std::string& k, const std::string& v) { get(c) = parse_number<double>(k, v); };
}

template <typename Getter>
Setter integer_at(Getter get) {
  return [get](ScenarioConfig& c, const std::string& k, const std::string& v) { get(c) = parse_number<int>(k, v); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"scenario_id", [](ScenarioConfig& c, const std::string&, const std::string& v) { c.scenario_id = v; }},
      {"layout",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) {
         if (v == "hexagonal") c.layout.layout = GridLayout::hexagonal;
         else if (v == "square") c.layout.layout = GridLayout::square;
         else throw ConfigError("invalid value '" + v + "' for key '" + k + "'");
       }},
      {"macro_count", integer_at([](ScenarioConfig& c) -> int& { return c.layout.macro_count; })},
      {"cell_radius_m", real_at([](ScenarioConfig& c) -> double& { return c.layout.cell_radius_m; })},
      {"picos_per_macrocell", integer_at([](ScenarioConfig& c) -> int& { return c.layout.picos_per_macrocell; })},
      {"users_per_macrocell",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) {
         c.user_densities.clear();
         for (const auto& item : split_list(v)) c.user_densities.push_back(parse_number<int>(k, item));
       }},
      {"tx_power_macro_dbm", real_at([](ScenarioConfig& c) -> double& { return c.radio.tx_power_macro_dbm; })},
      {"tx_power_pico_dbm", real_at([](ScenarioConfig& c) -> double& { return c.radio.tx_power_pico_dbm; })},
      {"noise_density_dbm_hz", real_at([](ScenarioConfig& c) -> double& { return c.radio.noise_density_dbm_hz; })},
      {"bandwidth_mhz", real_at([](ScenarioConfig& c) -> double& { return c.radio.bandwidth_mhz; })},
      {"subband_khz", real_at([](ScenarioConfig& c) -> double& { return c.radio.subband_khz; })},
      {"subbands", integer_at([](ScenarioConfig& c) -> int& { return c.radio.num_subbands; })},
      {"carrier_hz", real_at([](ScenarioConfig& c) -> double& { return c.propagation.carrier_hz; })},
      {"macro_reference_distance_m",
       real_at([](ScenarioConfig& c) -> double& { return c.propagation.macro.reference_distance_m; })},
      {"macro_path_loss_exponent", real_at([](ScenarioConfig& c) -> double& { return c.propagation.macro.exponent; })},
      {"macro_shadowing_std_db",
       real_at([](ScenarioConfig& c) -> double& { return c.propagation.macro.shadowing_std_db; })},
      {"pico_reference_distance_m",
       real_at([](ScenarioConfig& c) -> double& { return c.propagation.pico.reference_distance_m; })},
      {"pico_path_loss_exponent", real_at([](ScenarioConfig& c) -> double& { return c.propagation.pico.exponent; })},
      {"pico_shadowing_std_db",
       real_at([](ScenarioConfig& c) -> double& { return c.propagation.pico.shadowing_std_db; })},
      {"demand_mode",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) {
         if (v == "identical") c.demand_mode = DemandMode::identical;
         else if (v == "uniform") c.demand_mode = DemandMode::uniform;
         else throw ConfigError("invalid value '" + v + "' for key '" + k + "'");
       }},
      {"identical_rate_kbps", real(&ScenarioConfig::identical_rate_kbps)},
      {"max_rate_kbps", real(&ScenarioConfig::max_rate_kbps)},
      {"rate_floor_kbps", real(&ScenarioConfig::rate_floor_kbps)},
      {"algorithms",
       [](ScenarioConfig& c, const std::string&, const std::string& v) {
         c.algorithms.clear();
         for (const auto& item : split_list(v)) c.algorithms.push_back(parse_algorithm(item));
       }},
      {"policies",
       [](ScenarioConfig& c, const std::string&, const std::string& v) {
         c.policies.clear();
         for (const auto& item : split_list(v)) c.policies.push_back(parse_policy(item));
       }},
      {"step", real_at([](ScenarioConfig& c) -> double& { return c.solver.step; })},
      {"tolerance", real_at([](ScenarioConfig& c) -> double& { return c.solver.tolerance; })},
      {"max_iterations", integer_at([](ScenarioConfig& c) -> int& { return c.solver.max_iterations; })},
      {"initial_price",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) {
         if (v == "auto") c.solver.initial_price.reset();
         else c.solver.initial_price = parse_number<double>(k, v);
       }},
      {"centralized_method",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) {
         if (v == "direct") c.solver.centralized = CentralizedMethod::direct;
         else if (v == "primal_dual") c.solver.centralized = CentralizedMethod::primal_dual;
         else throw ConfigError("invalid value '" + v + "' for key '" + k + "'");
       }},
      {"relaxed_tolerance", real_at([](ScenarioConfig& c) -> double& { return c.solver.relaxed_tolerance; })},
      {"relaxed_max_sweeps", integer_at([](ScenarioConfig& c) -> int& { return c.solver.relaxed_max_sweeps; })},
      {"primal_dual_steps",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) {
         const auto items = split_list(v);
         if (items.size() != 4) throw ConfigError("primal_dual_steps needs four comma-separated values");
         for (std::size_t i = 0; i < 4; ++i) c.solver.primal_dual_steps[i] = parse_number<double>(k, items[i]);
       }},
      {"trials", integer_at([](ScenarioConfig& c) -> int& { return c.trials; })},
      {"seed",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) {
         c.master_seed = parse_number<std::uint64_t>(k, v);
       }},
  };
  return table;
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_arithmetic_v<T>) out += std::to_string(items[i]);
    else out += to_string(items[i]);
  }
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void apply_config_key(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(cfg, key, value);
}

ScenarioConfig parse_config(std::istream& in) {
  ScenarioConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    apply_config_key(cfg, trim(std::string_view(content).substr(0, eq)),
                     trim(std::string_view(content).substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

void ScenarioConfig::validate() const {
  require(layout.macro_count >= 1, "macro_count must be >= 1");
  require(layout.cell_radius_m > 0.0 && std::isfinite(layout.cell_radius_m), "cell_radius_m must be positive");
  require(layout.picos_per_macrocell >= 0, "picos_per_macrocell must be >= 0");
  require(!user_densities.empty(), "users_per_macrocell needs at least one value");
  for (int d : user_densities) require(d >= 1, "users_per_macrocell values must be >= 1");
  require(radio.bandwidth_mhz > 0.0, "bandwidth_mhz must be positive");
  require(radio.subband_khz > 0.0, "subband_khz must be positive");
  require(radio.num_subbands >= 1, "subbands must be >= 1");
  require(propagation.carrier_hz > 0.0, "carrier_hz must be positive");
  for (const auto* tp : {&propagation.macro, &propagation.pico}) {
    require(tp->reference_distance_m > 0.0, "reference distances must be positive");
    require(tp->exponent > 0.0, "path loss exponents must be positive");
    require(tp->shadowing_std_db >= 0.0, "shadowing std must be non-negative");
  }
  require(identical_rate_kbps > 0.0 && max_rate_kbps > 0.0, "practical rates must be positive");
  require(rate_floor_kbps > 0.0, "rate_floor_kbps must be positive");
  require(!algorithms.empty(), "algorithms must not be empty");
  require(!policies.empty(), "policies must not be empty");
  require(solver.step > 0.0, "step must be positive");
  require(solver.tolerance >= 0.0, "tolerance must be non-negative");
  require(solver.max_iterations >= 1, "max_iterations must be >= 1");
  require(solver.relaxed_tolerance > 0.0, "relaxed_tolerance must be positive");
  require(solver.relaxed_max_sweeps >= 1, "relaxed_max_sweeps must be >= 1");
  for (double xi : solver.primal_dual_steps) require(xi > 0.0, "primal_dual_steps must be positive");
  require(trials >= 1, "trials must be >= 1");
}

void write_config(std::ostream& out, const ScenarioConfig& c) {
  std::ostringstream o;
  o << std::setprecision(17);
  o << "scenario_id = " << c.scenario_id << "\n"
    << "layout = " << (c.layout.layout == GridLayout::hexagonal ? "hexagonal" : "square") << "\n"
    << "macro_count = " << c.layout.macro_count << "\n"
    << "cell_radius_m = " << c.layout.cell_radius_m << "\n"
    << "picos_per_macrocell = " << c.layout.picos_per_macrocell << "\n"
    << "users_per_macrocell = " << join(c.user_densities) << "\n"
    << "tx_power_macro_dbm = " << c.radio.tx_power_macro_dbm << "\n"
    << "tx_power_pico_dbm = " << c.radio.tx_power_pico_dbm << "\n"
    << "noise_density_dbm_hz = " << c.radio.noise_density_dbm_hz << "\n"
    << "bandwidth_mhz = " << c.radio.bandwidth_mhz << "\n"
    << "subband_khz = " << c.radio.subband_khz << "\n"
    << "subbands = " << c.radio.num_subbands << "\n"
    << "carrier_hz = " << c.propagation.carrier_hz << "\n"
    << "macro_reference_distance_m = " << c.propagation.macro.reference_distance_m << "\n"
    << "macro_path_loss_exponent = " << c.propagation.macro.exponent << "\n"
    << "macro_shadowing_std_db = " << c.propagation.macro.shadowing_std_db << "\n"
    << "pico_reference_distance_m = " << c.propagation.pico.reference_distance_m << "\n"
    << "pico_path_loss_exponent = " << c.propagation.pico.exponent << "\n"
    << "pico_shadowing_std_db = " << c.propagation.pico.shadowing_std_db << "\n"
    << "demand_mode = " << (c.demand_mode == DemandMode::identical ? "identical" : "uniform") << "\n"
    << "identical_rate_kbps = " << c.identical_rate_kbps << "\n"
    << "max_rate_kbps = " << c.max_rate_kbps << "\n"
    << "rate_floor_kbps = " << c.rate_floor_kbps << "\n"
    << "algorithms = " << join(c.algorithms) << "\n"
    << "policies = " << join(c.policies) << "\n"
    << "step = " << c.solver.step << "\n"
    << "tolerance = " << c.solver.tolerance << "\n"
    << "max_iterations = " << c.solver.max_iterations << "\n";
  if (c.solver.initial_price) o << "initial_price = " << *c.solver.initial_price << "\n";
  else o << "initial_price = auto\n";
  o << "centralized_method = " << (c.solver.centralized == CentralizedMethod::direct ? "direct" : "primal_dual") << "\n"
    << "relaxed_tolerance = " << c.solver.relaxed_tolerance << "\n"
    << "relaxed_max_sweeps = " << c.solver.relaxed_max_sweeps << "\n"
    << "primal_dual_steps = " << c.solver.primal_dual_steps[0] << "," << c.solver.primal_dual_steps[1] << ","
    << c.solver.primal_dual_steps[2] << "," << c.solver.primal_dual_steps[3] << "\n"
    << "trials = " << c.trials << "\n"
    << "seed = " << c.master_seed << "\n";
  out << o.str();
}

}  // namespace hetnet
