#include "orim/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "orim/errors.hpp"

namespace orim {
namespace {

using nlohmann::json;

DrivingSystem parse_driving(const json& j) {
  const std::string kind = j.value("kind", "iid");
  if (kind == "iid") {
    if (!j.contains("probabilities")) {
      throw ConfigError("driving.probabilities is required for iid driving");
    }
    return DrivingSystem::iid(j.at("probabilities").get<std::vector<double>>());
  }
  if (kind == "markov") {
    if (!j.contains("transition") || !j.contains("stationary")) {
      throw ConfigError(
          "driving.transition and driving.stationary are required for markov driving");
    }
    return DrivingSystem::markov(
        j.at("transition").get<std::vector<std::vector<double>>>(),
        j.at("stationary").get<std::vector<double>>());
  }
  throw ConfigError("driving.kind must be 'iid' or 'markov'");
}

std::vector<IntervalSet> parse_holes(const json& j, std::size_t symbols) {
  std::vector<IntervalSet> holes;
  if (!j.is_array()) throw ConfigError("system.holes must be an array per symbol");
  for (const auto& per_symbol : j) {
    std::vector<HalfOpen> parts;
    for (const auto& pair : per_symbol) {
      if (!pair.is_array() || pair.size() != 2) {
        throw ConfigError("each hole component must be a [lo, hi] pair");
      }
      parts.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
    holes.push_back(IntervalSet(std::move(parts)));
  }
  if (holes.size() != symbols) {
    throw ConfigError("system.holes must list one entry per symbol");
  }
  return holes;
}

Potential parse_potential(const json& j) {
  if (!j.is_object()) return Potential::geometric(1.0);
  const std::string kind = j.value("kind", "geometric");
  if (kind == "geometric") return Potential::geometric(j.value("t", 1.0));
  if (kind == "tabulated") {
    if (!j.contains("tables")) {
      throw ConfigError("potential.tables is required for tabulated potentials");
    }
    return Potential::tabulated(
        j.at("tables").get<std::vector<std::vector<double>>>());
  }
  throw ConfigError("potential.kind must be 'geometric' or 'tabulated'");
}

RandomOpenSystem parse_system(const json& j) {
  if (!j.is_object()) throw ConfigError("config.system must be an object");
  const DrivingSystem driving = parse_driving(j.at("driving"));
  const Potential potential = parse_potential(j.value("potential", json::object()));
  const std::string kind = j.value("kind", "");
  const std::size_t symbols = static_cast<std::size_t>(driving.symbols());
  const std::vector<IntervalSet> holes =
      parse_holes(j.value("holes", json::array()), symbols);
  if (kind == "beta") {
    if (!j.contains("betas")) throw ConfigError("system.betas is required");
    return build_beta_system(driving, j.at("betas").get<std::vector<double>>(),
                             holes, potential);
  }
  if (kind == "affine") {
    if (!j.contains("breakpoints") || !j.contains("slopes")) {
      throw ConfigError("system.breakpoints and system.slopes are required");
    }
    return build_affine_ly_system(
        driving, j.at("breakpoints").get<std::vector<std::vector<double>>>(),
        j.at("slopes").get<std::vector<std::vector<double>>>(), holes, potential);
  }
  throw ConfigError("system.kind must be 'beta' or 'affine'");
}

BatteryKind battery_kind_from_name(const std::string& name) {
  if (name == "constant") return BatteryKind::constant;
  if (name == "indicator") return BatteryKind::indicator;
  if (name == "ramp") return BatteryKind::ramp;
  if (name == "hat") return BatteryKind::hat;
  throw ConfigError("unknown battery function kind: " + name);
}

std::vector<BatterySpec> parse_battery(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "default") return default_battery();
    throw ConfigError("battery must be 'default' or an explicit array");
  }
  std::vector<BatterySpec> specs;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& item = j[i];
    BatterySpec spec;
    spec.kind = battery_kind_from_name(item.value("kind", "constant"));
    spec.a = item.value("a", spec.kind == BatteryKind::constant ? 1.0 : 0.0);
    spec.b = item.value("b", 1.0);
    spec.id = item.value("id", item.value("kind", "constant") + "_" +
                                   std::to_string(i));
    specs.push_back(std::move(spec));
  }
  if (specs.empty()) throw ConfigError("battery must not be empty");
  return specs;
}

}  // namespace

std::vector<BatterySpec> default_battery() {
  std::vector<BatterySpec> specs;
  specs.push_back({"const", BatteryKind::constant, 1.0, 1.0});
  for (int k = 0; k < 8; ++k) {
    specs.push_back({"ind8_" + std::to_string(k), BatteryKind::indicator,
                     k / 8.0, (k + 1) / 8.0});
  }
  specs.push_back({"ramp_up", BatteryKind::ramp, 0.0, 1.0});
  specs.push_back({"ramp_down", BatteryKind::ramp, 1.0, 0.0});
  specs.push_back({"hat_25", BatteryKind::hat, 0.125, 0.375});
  specs.push_back({"hat_50", BatteryKind::hat, 0.375, 0.625});
  specs.push_back({"hat_75", BatteryKind::hat, 0.625, 0.875});
  specs.push_back({"hat_wide", BatteryKind::hat, 0.25, 0.75});
  specs.push_back({"ind_0_50", BatteryKind::indicator, 0.0, 0.5});
  specs.push_back({"ind_25_75", BatteryKind::indicator, 0.25, 0.75});
  specs.push_back({"ind_0_25", BatteryKind::indicator, 0.0, 0.25});
  specs.push_back({"ind_0_75", BatteryKind::indicator, 0.0, 0.75});
  specs.push_back({"ind_wide", BatteryKind::indicator, 0.0625, 0.9375});
  return specs;
}

std::vector<TestFunction> make_battery(const GridPtr& grid,
                                       const std::vector<BatterySpec>& specs) {
  std::vector<TestFunction> battery;
  battery.reserve(specs.size());
  for (const BatterySpec& spec : specs) {
    switch (spec.kind) {
      case BatteryKind::constant:
        battery.push_back({spec.id, GridFunction(grid, spec.a)});
        break;
      case BatteryKind::indicator: {
        if (!(spec.b > spec.a)) {
          throw ConfigError("indicator '" + spec.id + "' needs a < b");
        }
        battery.push_back(
            {spec.id, indicator(grid, IntervalSet::single(spec.a, spec.b))});
        break;
      }
      case BatteryKind::ramp: {
        std::vector<double> v(grid->cells());
        for (std::size_t i = 0; i < v.size(); ++i) {
          v[i] = spec.a + (spec.b - spec.a) * grid->midpoint(i);
        }
        battery.push_back({spec.id, GridFunction(grid, std::move(v))});
        break;
      }
      case BatteryKind::hat: {
        if (!(spec.b > spec.a)) {
          throw ConfigError("hat '" + spec.id + "' needs a < b");
        }
        const double c = 0.5 * (spec.a + spec.b);
        const double w = 0.5 * (spec.b - spec.a);
        std::vector<double> v(grid->cells());
        for (std::size_t i = 0; i < v.size(); ++i) {
          v[i] = std::max(0.0, 1.0 - std::abs(grid->midpoint(i) - c) / w);
        }
        battery.push_back({spec.id, GridFunction(grid, std::move(v))});
        break;
      }
    }
  }
  return battery;
}

RunConfig parse_config(const nlohmann::json& j) {
  try {
    RunConfig cfg;
    cfg.raw = j;
    cfg.system = std::make_shared<const RandomOpenSystem>(parse_system(j.at("system")));

    const json grid = j.value("grid", json::object());
    cfg.resolution = grid.value("resolution", std::size_t{1024});
    if (cfg.resolution < 2) throw ConfigError("grid.resolution must be at least 2");

    const json orbit = j.value("orbit", json::object());
    cfg.n_back = orbit.value("n_back", 64);
    cfg.n_fwd = orbit.value("n_fwd", 96);
    if (cfg.n_back < 0 || cfg.n_fwd < 0) {
      throw ConfigError("orbit window lengths must be nonnegative");
    }

    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.threads = j.value("threads", 1);
    if (cfg.threads < 1) throw ConfigError("threads must be at least 1");
    cfg.estimator = estimator_from_name(j.value("estimator", "sandwich"));
    cfg.t_grid = j.value("t_grid", std::vector<double>{});
    for (double t : cfg.t_grid) {
      if (!(t >= 0.0) || !(t <= 4.0)) {
        throw ConfigError("t_grid entries must lie in [0, 4]");
      }
    }

    const json samples = j.value("samples", json::object());
    cfg.ensemble.orbits = samples.value("orbits", 16);
    cfg.ensemble.depth = samples.value("depth", 30);
    cfg.decay_depth = samples.value("decay_depth", 20);
    cfg.density_depth = samples.value("density_depth", 30);
    if (cfg.ensemble.orbits < 1) throw ConfigError("samples.orbits must be positive");
    if (cfg.ensemble.depth < 1) throw ConfigError("samples.depth must be positive");

    const json tol = j.value("tolerances", json::object());
    cfg.ensemble.lambda_n_max = tol.value("lambda_n_max", 30);
    cfg.ensemble.lambda_tol = tol.value("lambda_tol", 1e-9);
    cfg.tol_t = tol.value("tol_t", 4e-3);
    cfg.escape_tol = tol.value("escape_tol", 1e-6);
    if (cfg.ensemble.lambda_n_max < 1) {
      throw ConfigError("tolerances.lambda_n_max must be positive");
    }

    cfg.ensemble.seed = cfg.seed;
    cfg.ensemble.threads = cfg.threads;

    cfg.battery = j.contains("battery") ? parse_battery(j.at("battery"))
                                        : default_battery();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

std::string config_hash(const nlohmann::json& j) {
  const std::string dump = j.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace orim
