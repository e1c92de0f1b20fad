#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "orim/analysis.hpp"
#include "orim/quenched.hpp"
#include "orim/system.hpp"

namespace orim {

inline constexpr const char* kVersion = "0.1.0";

enum class BatteryKind { constant, indicator, ramp, hat };

// Test-function recipe, resolved against a grid at run time.
//   constant:  f = a everywhere
//   indicator: f = 1 on [a, b)
//   ramp:      f(x) = a + (b - a) x
//   hat:       tent on [a, b], peak 1 at the midpoint
struct BatterySpec {
  std::string id;
  BatteryKind kind = BatteryKind::constant;
  double a = 1.0;
  double b = 1.0;
};

// Twenty-function default battery: the constant, the eighth indicators, both
// ramps, tents at the quarter points, and a few wider indicators whose jump
// points hit ternary-friendly coordinates.
std::vector<BatterySpec> default_battery();

std::vector<TestFunction> make_battery(const GridPtr& grid,
                                       const std::vector<BatterySpec>& specs);

struct RunConfig {
  nlohmann::json raw;
  std::shared_ptr<const RandomOpenSystem> system;
  std::size_t resolution = 1024;
  int n_back = 64;
  int n_fwd = 96;
  std::uint64_t seed = 1;
  int threads = 1;
  PressureEstimator estimator = PressureEstimator::sandwich;
  std::vector<double> t_grid;
  EnsembleSettings ensemble;
  double tol_t = 4e-3;
  double escape_tol = 1e-6;
  int decay_depth = 20;
  int density_depth = 30;
  std::vector<BatterySpec> battery;
};

// Parses and validates a run configuration. Structural problems throw
// ConfigError with the offending key in the message.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// FNV-1a (64-bit) of the canonical dump, as fixed-width hex.
std::string config_hash(const nlohmann::json& j);

}  // namespace orim
