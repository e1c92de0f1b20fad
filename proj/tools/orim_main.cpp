#include <chrono>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "orim/analysis.hpp"
#include "orim/config.hpp"
#include "orim/errors.hpp"
#include "orim/oracle.hpp"
#include "orim/quenched.hpp"
#include "orim/report.hpp"

namespace {

using nlohmann::json;
using namespace orim;

struct Options {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> estimator;
};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Orbit window checks: forward room for the functional runs, backward room
// for the density construction.
void require_window(const RunConfig& cfg, int need_back, int need_fwd) {
  if (cfg.n_back < need_back) {
    throw ConfigError("orbit.n_back = " + std::to_string(cfg.n_back) +
                      " but this run needs at least " + std::to_string(need_back));
  }
  if (cfg.n_fwd < need_fwd) {
    throw ConfigError("orbit.n_fwd = " + std::to_string(cfg.n_fwd) +
                      " but this run needs at least " + std::to_string(need_fwd));
  }
}

json run_pressure(const RunConfig& cfg, const GridPtr& grid, std::string* csv) {
  if (cfg.t_grid.empty()) {
    const PressurePoint p =
        expected_pressure(*cfg.system, grid, cfg.ensemble, cfg.estimator, true);
    if (csv) {
      PressureCurve single;
      single.points.push_back(p);
      *csv = pressure_csv(single);
    }
    return {{"point", p}};
  }
  const PressureCurve curve =
      pressure_curve(*cfg.system, grid, cfg.t_grid, cfg.ensemble, cfg.estimator);
  if (csv) *csv = pressure_csv(curve);
  return {{"curve", curve}};
}

json run_dimension(const RunConfig& cfg, const GridPtr& grid) {
  const DimensionReport r =
      bowen_dimension(*cfg.system, grid, cfg.ensemble, cfg.estimator, cfg.tol_t);
  return {{"dimension", r}};
}

json run_escape(const RunConfig& cfg, const GridPtr& grid) {
  const EscapeReport r =
      escape_rate(*cfg.system, grid, cfg.ensemble, cfg.estimator, cfg.escape_tol);
  return {{"escape", r}};
}

json run_density(const RunConfig& cfg, const GridPtr& grid, std::string* csv) {
  require_window(cfg, cfg.density_depth + 1,
                 cfg.ensemble.lambda_n_max + 2);
  const MatrixCache cache(*cfg.system, grid);
  const Orbit orbit =
      sample_orbit(cfg.system->driving(), cfg.seed, cfg.n_back, cfg.n_fwd);
  const DensityEstimate here =
      invariant_density(cache, orbit, 0, cfg.density_depth,
                        cfg.ensemble.lambda_n_max, cfg.ensemble.lambda_tol);
  const DensityEstimate next =
      invariant_density(cache, orbit, 1, cfg.density_depth,
                        cfg.ensemble.lambda_n_max, cfg.ensemble.lambda_tol);
  const LambdaEstimate lam = fiber_lambda(cache, orbit, 0,
                                          cfg.ensemble.lambda_n_max,
                                          cfg.ensemble.lambda_tol, true);
  const std::vector<TestFunction> battery = make_battery(grid, cfg.battery);
  const MeasureEstimate mu =
      invariant_measure_eval(cache, orbit, 0, here, battery,
                             cfg.ensemble.lambda_n_max, cfg.ensemble.lambda_tol);
  const RaccimEstimate rac =
      raccim_eval(cache, *cfg.system, orbit, 0, here, next, battery,
                  cfg.ensemble.lambda_n_max, cfg.ensemble.lambda_tol);
  if (csv) *csv = density_csv(grid, here);
  return {{"density", here},
          {"lambda", lam},
          {"mu", mu},
          {"raccim", rac}};
}

json run_decay(const RunConfig& cfg, const GridPtr& grid, std::string* csv) {
  require_window(cfg, cfg.density_depth + 1,
                 cfg.decay_depth + cfg.ensemble.lambda_n_max + 2);
  const MatrixCache cache(*cfg.system, grid);
  const Orbit orbit =
      sample_orbit(cfg.system->driving(), cfg.seed, cfg.n_back, cfg.n_fwd);
  const std::vector<TestFunction> battery = make_battery(grid, cfg.battery);
  const DecayReport r =
      decay_fit(cache, orbit, 0, battery, cfg.decay_depth, cfg.density_depth,
                cfg.ensemble.lambda_n_max, cfg.ensemble.lambda_tol);
  if (csv) *csv = decay_csv(r);
  return {{"decay", r}};
}

json run_check(const RunConfig& cfg, const GridPtr& grid) {
  const ConditionReport conditions = condition_check(*cfg.system);
  const MatrixCache cache(*cfg.system, grid);
  const Orbit orbit =
      sample_orbit(cfg.system->driving(), cfg.seed, cfg.n_back, cfg.n_fwd);
  const int depth = std::min(5, cfg.n_fwd);
  const LyConstants ly =
      ly_constants(cache, *cfg.system, orbit, 0, depth,
                   cfg.ensemble.lambda_n_max, cfg.ensemble.lambda_tol);
  return {{"conditions", conditions}, {"ly", ly}};
}

json run_oracle(const RunConfig& cfg, std::string* csv) {
  const Orbit orbit =
      sample_orbit(cfg.system->driving(), cfg.seed, cfg.n_back, cfg.n_fwd);
  json out;

  std::vector<IntervalSet> sets;
  std::vector<double> masses;
  std::vector<std::size_t> components;
  const int depth_cap = std::min(cfg.ensemble.depth, cfg.n_fwd);
  for (int n = 0; n <= depth_cap; ++n) {
    IntervalSet x;
    try {
      x = survivor_intervals(*cfg.system, orbit, 0, n);
    } catch (const DepthError&) {
      break;
    }
    if (!(x.total_length() > 0.0)) break;
    masses.push_back(x.total_length());
    components.push_back(x.components());
    sets.push_back(std::move(x));
  }
  out["survivor_masses"] = masses;
  out["survivor_components"] = components;
  if (csv) *csv = survivors_csv(masses, components);
  if (sets.size() >= 3) {
    try {
      out["box_count"] = box_count_dimension(sets);
    } catch (const InsufficientDataError&) {
      // fewer usable scales than depths; leave the field out
    }
  }

  if (cfg.system->analytic() &&
      cfg.system->potential().kind() == PotentialKind::geometric) {
    const double t = cfg.system->potential().t();
    out["analytic"] = {{"ep_open", analytic_pressure(*cfg.system, t, true)},
                       {"ep_closed", analytic_pressure(*cfg.system, t, false)}};
    const AnalyticRoot root = analytic_root(*cfg.system);
    out["analytic"]["root"] = {{"h", root.h},
                               {"at_lower", root.at_lower},
                               {"at_upper", root.at_upper},
                               {"ep_at_0", root.ep_at_0},
                               {"ep_at_1", root.ep_at_1}};
  }

  const int cyl_depth = std::min(6, cfg.n_fwd);
  const std::vector<Cylinder> cyls =
      enumerate_cylinders(*cfg.system, orbit, 0, cyl_depth, true);
  out["cylinders"] = {
      {"depth", cyl_depth},
      {"count", cyls.size()},
      {"zeta", contiguous_nonfull_count(*cfg.system, orbit, 0, cyl_depth)},
      {"min_preimages", min_preimage_count(*cfg.system, orbit, 0, cyl_depth)}};
  return out;
}

int run(const std::string& command, const Options& opt) {
  RunConfig cfg = load_config(opt.config_path);
  if (opt.seed) {
    cfg.seed = *opt.seed;
    cfg.ensemble.seed = *opt.seed;
  }
  if (opt.threads) {
    if (*opt.threads < 1) throw ConfigError("threads must be at least 1");
    cfg.threads = *opt.threads;
    cfg.ensemble.threads = *opt.threads;
  }
  if (opt.estimator) cfg.estimator = estimator_from_name(*opt.estimator);

  const auto t0 = std::chrono::steady_clock::now();
  const GridPtr grid = Grid::build(*cfg.system, cfg.resolution);

  const bool want_csv = ends_with(opt.out, ".csv");
  std::string csv;
  std::string* csv_sink = want_csv ? &csv : nullptr;

  json result;
  if (command == "pressure") {
    result = run_pressure(cfg, grid, csv_sink);
  } else if (command == "dimension") {
    result = run_dimension(cfg, grid);
  } else if (command == "escape") {
    result = run_escape(cfg, grid);
  } else if (command == "density") {
    result = run_density(cfg, grid, csv_sink);
  } else if (command == "decay") {
    result = run_decay(cfg, grid, csv_sink);
  } else if (command == "check") {
    result = run_check(cfg, grid);
  } else if (command == "oracle") {
    result = run_oracle(cfg, csv_sink);
  } else {
    throw ConfigError("unknown command: " + command);
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (want_csv) {
    if (csv.empty()) {
      throw ConfigError(
          "CSV output is supported for pressure, density, decay, and oracle");
    }
    write_text(opt.out, csv);
    return 0;
  }

  write_text(opt.out, envelope(cfg, wall, std::move(result)).dump(2));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for randomly driven open interval maps"};
  app.require_subcommand(1);

  Options opt;
  const std::vector<std::string> commands = {
      "pressure", "dimension", "escape", "density", "decay", "check", "oracle"};
  const std::vector<std::string> descriptions = {
      "expected log multiplier (single t or a t-grid)",
      "survivor-set dimension via the pressure root",
      "escape rate via survivor masses and the pressure gap",
      "invariant density, fiber multiplier, and conditioned measures at one position",
      "normalized-iterate decay and correlation residuals",
      "sufficient-condition and variation-inequality diagnostics",
      "exact interval-arithmetic reference quantities"};
  for (std::size_t i = 0; i < commands.size(); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i], descriptions[i]);
    sub->add_option("--config", opt.config_path, "JSON run configuration")
        ->required();
    sub->add_option("--out", opt.out, "output path (stdout when omitted)");
    sub->add_option("--seed", opt.seed, "override the config seed");
    sub->add_option("--threads", opt.threads, "override the config thread count");
    sub->add_option("--estimator", opt.estimator,
                    "override the estimator (sandwich|lambda_product|analytic)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::config);
  } catch (const InconclusiveError& e) {
    std::cerr << "inconclusive: " << e.what() << "\n";
    return static_cast<int>(ExitCode::inconclusive);
  } catch (const std::runtime_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return static_cast<int>(ExitCode::numerics);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::failure);
  }
}
