#include "orim/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "orim/errors.hpp"
#include "orim/oracle.hpp"

namespace orim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  const int workers = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

struct OrbitExponents {
  double lo = 0.0;
  double hi = 0.0;
};

// Scaled n-step iterate of 1: returns (1/n) log of the masked minimum and the
// supremum of the iterate.
OrbitExponents iterate_exponents(const MatrixCache& cache, const Orbit& orbit,
                                 int depth, bool open) {
  GridFunction v(cache.grid(), 1.0);
  double log_scale = 0.0;
  for (int j = 0; j < depth; ++j) {
    v = apply(cache.at(orbit, j, open), v);
    const double s = v.max();
    if (!(s > 0.0)) {
      throw DegenerateSystemError("iterate support died at step " +
                                  std::to_string(j + 1));
    }
    log_scale += std::log(s);
    v = v.scaled(1.0 / s);
  }
  double masked_min = kInf;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > 0.0) masked_min = std::min(masked_min, v[i]);
  }
  OrbitExponents out;
  out.lo = (log_scale + std::log(masked_min)) / depth;
  out.hi = log_scale / depth;  // sup is 1 after the final scaling
  return out;
}

double sample_mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double standard_error(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(xs.size() - 1);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

int draw_index(std::mt19937_64& rng, const std::vector<double>& probs) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

double word_probability(const DrivingSystem& driving, const std::vector<int>& w) {
  double p = driving.symbol_measure(w[0]);
  if (driving.kind() == DrivingKind::markov) {
    for (std::size_t j = 1; j < w.size(); ++j) {
      p *= driving.transition()[w[j - 1]][w[j]];
    }
  } else {
    for (std::size_t j = 1; j < w.size(); ++j) p *= driving.symbol_measure(w[j]);
  }
  return p;
}

}  // namespace

std::string estimator_name(PressureEstimator e) {
  switch (e) {
    case PressureEstimator::sandwich: return "sandwich";
    case PressureEstimator::lambda_product: return "lambda_product";
    case PressureEstimator::analytic: return "analytic";
  }
  return "sandwich";
}

PressureEstimator estimator_from_name(const std::string& name) {
  if (name == "sandwich") return PressureEstimator::sandwich;
  if (name == "lambda_product" || name == "lambda") {
    return PressureEstimator::lambda_product;
  }
  if (name == "analytic") return PressureEstimator::analytic;
  throw ConfigError("unknown pressure estimator: " + name);
}

PressurePoint expected_pressure(const RandomOpenSystem& system, const GridPtr& grid,
                                const EnsembleSettings& settings,
                                PressureEstimator estimator, bool open) {
  PressurePoint point;
  point.t = system.potential().kind() == PotentialKind::geometric
                ? system.potential().t()
                : 0.0;
  point.depth = settings.depth;
  point.estimator = estimator_name(estimator);

  if (estimator == PressureEstimator::analytic) {
    if (system.potential().kind() != PotentialKind::geometric) {
      throw ConfigError("the closed-form pressure needs a geometric potential");
    }
    point.value = analytic_pressure(system, system.potential().t(), open);
    point.lower = point.upper = point.value;
    point.std_error = 0.0;
    point.orbits = 0;
    return point;
  }

  if (settings.orbits < 1) throw ConfigError("at least one orbit is required");
  if (settings.depth < 1) throw ConfigError("pressure depth must be positive");

  const MatrixCache cache(system, grid);
  const int n_fwd = settings.depth + settings.lambda_n_max + 2;
  const int k = settings.orbits;
  std::vector<double> values(k), lowers(k), uppers(k);

  parallel_for(k, settings.threads, [&](int i) {
    const Orbit orbit = sample_orbit(system.driving(),
                                     mix_seed(settings.seed, static_cast<std::uint64_t>(i)),
                                     0, n_fwd);
    const OrbitExponents ex = iterate_exponents(cache, orbit, settings.depth, open);
    lowers[i] = ex.lo;
    uppers[i] = ex.hi;
    if (estimator == PressureEstimator::sandwich) {
      values[i] = 0.5 * (ex.lo + ex.hi);
    } else {
      double log_sum = 0.0;
      for (int j = 0; j < settings.depth; ++j) {
        const LambdaEstimate lam = fiber_lambda(cache, orbit, j, settings.lambda_n_max,
                                                settings.lambda_tol, open);
        if (!(lam.value > 0.0)) {
          throw DegenerateSystemError("fiber multiplier vanished at step " +
                                      std::to_string(j));
        }
        log_sum += std::log(lam.value);
      }
      values[i] = log_sum / settings.depth;
    }
  });

  point.value = sample_mean(values);
  point.std_error = standard_error(values, point.value);
  point.lower = sample_mean(lowers);
  point.upper = sample_mean(uppers);
  point.orbits = k;
  return point;
}

PressureCurve pressure_curve(const RandomOpenSystem& system, const GridPtr& grid,
                             const std::vector<double>& t_grid,
                             const EnsembleSettings& settings,
                             PressureEstimator estimator) {
  if (system.potential().kind() != PotentialKind::geometric) {
    throw ConfigError("a pressure curve varies t, so the potential must be geometric");
  }
  if (t_grid.empty()) {
    throw ConfigError("pressure curve needs a nonempty t grid");
  }
  PressureCurve curve;
  curve.points.reserve(t_grid.size());
  for (double t : t_grid) {
    const RandomOpenSystem at_t = system.with_potential(Potential::geometric(t));
    PressurePoint p = expected_pressure(at_t, grid, settings, estimator, true);
    p.t = t;
    curve.points.push_back(std::move(p));
  }
  return curve;
}

EscapeReport escape_rate(const RandomOpenSystem& system, const GridPtr& grid,
                         const EnsembleSettings& settings,
                         PressureEstimator estimator, double tolerance) {
  if (system.potential().kind() != PotentialKind::geometric ||
      system.potential().t() != 1.0) {
    throw ConfigError(
        "the survivor-mass escape route uses reference masses that are "
        "Lebesgue only at t = 1");
  }
  if (settings.orbits < 1) throw ConfigError("at least one orbit is required");

  EscapeReport report;
  report.tolerance = tolerance;
  report.masses.assign(settings.orbits, {});
  std::vector<double> slopes(settings.orbits), r2s(settings.orbits);
  std::vector<int> reached(settings.orbits, 0);

  parallel_for(settings.orbits, settings.threads, [&](int k) {
    const Orbit orbit = sample_orbit(system.driving(),
                                     mix_seed(settings.seed, static_cast<std::uint64_t>(k)),
                                     0, settings.depth);
    std::vector<double> mass;
    mass.reserve(settings.depth + 1);
    for (int n = 0; n <= settings.depth; ++n) {
      IntervalSet x;
      try {
        x = survivor_intervals(system, orbit, 0, n);
      } catch (const DepthError&) {
        break;  // component budget reached; fit on what we have
      }
      const double leb = x.total_length();
      if (!(leb > 0.0)) break;
      mass.push_back(leb);
    }
    const int reach = static_cast<int>(mass.size()) - 1;
    if (reach < 8) {
      throw InsufficientDataError(
          "survivor masses reached depth " + std::to_string(reach) +
          "; at least 8 levels are needed for the slope fit");
    }
    const int from = reach / 2;
    std::vector<double> xs, ys;
    for (int n = from; n <= reach; ++n) {
      xs.push_back(static_cast<double>(n));
      ys.push_back(-std::log(mass[n]));
    }
    const LinearFit fit = linear_fit(xs, ys);
    slopes[k] = fit.slope;
    r2s[k] = fit.r2;
    reached[k] = reach;
    report.masses[k] = std::move(mass);
  });

  report.slope = sample_mean(slopes);
  report.slope_r2 = *std::min_element(r2s.begin(), r2s.end());
  report.depth = *std::min_element(reached.begin(), reached.end());
  report.fit_from = report.depth / 2;

  const PressurePoint closed =
      expected_pressure(system.without_holes(), grid, settings, estimator, false);
  const PressurePoint open =
      expected_pressure(system, grid, settings, estimator, true);
  report.pressure_difference = closed.value - open.value;
  report.pressure_difference_error =
      std::sqrt(closed.std_error * closed.std_error +
                open.std_error * open.std_error);
  report.agree = std::abs(report.slope - report.pressure_difference) <= tolerance;
  return report;
}

DimensionReport bowen_dimension(const RandomOpenSystem& system, const GridPtr& grid,
                                const EnsembleSettings& settings,
                                PressureEstimator estimator, double tol_t,
                                int orbit_cap) {
  if (system.potential().kind() != PotentialKind::geometric) {
    throw ConfigError("the dimension root varies t, so the potential must be geometric");
  }
  DimensionReport report;

  if (estimator == PressureEstimator::analytic) {
    const AnalyticRoot root = analytic_root(system);
    report.h = root.h;
    report.boundary_low = root.at_lower;
    report.boundary_high = root.at_upper;
    report.bracket_lo = root.at_lower ? 0.0 : (root.at_upper ? 1.0 : root.h - 1e-12);
    report.bracket_hi = root.at_lower ? 0.0 : (root.at_upper ? 1.0 : root.h + 1e-12);
    report.method = "analytic";
    return report;
  }

  if (!(tol_t > 0.0)) throw ConfigError("tol_t must be positive");
  report.method = "mc_bisection";
  int decision = 0;

  // 95% CI sign decision with orbit doubling up to the cap.
  auto decide_sign = [&](double t) -> int {
    const RandomOpenSystem at_t = system.with_potential(Potential::geometric(t));
    int k = settings.orbits;
    int level = 0;
    const int this_decision = decision++;
    while (true) {
      EnsembleSettings s = settings;
      s.orbits = k;
      s.seed = mix_seed(settings.seed,
                        (static_cast<std::uint64_t>(this_decision) << 8) |
                            static_cast<std::uint64_t>(level));
      const PressurePoint p =
          expected_pressure(at_t, grid, s, estimator, true);
      report.steps.push_back({t, p.value, p.std_error, k});
      const double ci = 1.96 * p.std_error;
      if (std::abs(p.value) > ci) return p.value > 0.0 ? 1 : -1;
      // A deterministic ensemble with value exactly zero is a boundary
      // hit, not a statistical stalemate.
      if (p.std_error == 0.0) return 0;
      if (k >= orbit_cap) {
        throw InconclusiveError(
            "pressure sign at t = " + std::to_string(t) +
            " undecided with " + std::to_string(k) + " orbits");
      }
      k = std::min(2 * k, orbit_cap);
      ++level;
    }
  };

  if (decide_sign(0.0) <= 0) {
    report.boundary_low = true;
    report.h = 0.0;
    report.bracket_lo = report.bracket_hi = 0.0;
    return report;
  }
  if (decide_sign(1.0) >= 0) {
    report.boundary_high = true;
    report.h = 1.0;
    report.bracket_lo = report.bracket_hi = 1.0;
    return report;
  }

  double lo = 0.0, hi = 1.0;
  while (hi - lo > tol_t) {
    const double mid = 0.5 * (lo + hi);
    const int sign = decide_sign(mid);
    if (sign == 0) {
      // Deterministic exact root: collapse the bracket.
      lo = hi = mid;
      break;
    }
    if (sign > 0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  report.h = 0.5 * (lo + hi);
  report.bracket_lo = lo;
  report.bracket_hi = hi;
  return report;
}

DecayReport decay_fit(const MatrixCache& cache, const Orbit& orbit, long position,
                      const std::vector<TestFunction>& battery, int depth,
                      int density_depth, int lambda_n_max, double lambda_tol) {
  if (battery.empty()) throw ConfigError("decay_fit needs a non-empty battery");
  if (depth < 1) throw ConfigError("decay depth must be positive");

  DecayReport report;
  report.depth = depth;

  std::vector<DensityEstimate> dens;
  dens.reserve(depth + 1);
  for (int n = 0; n <= depth; ++n) {
    dens.push_back(invariant_density(cache, orbit, position + n, density_depth,
                                     lambda_n_max, lambda_tol));
  }
  std::vector<double> lam(depth);
  for (int j = 0; j < depth; ++j) {
    lam[j] = fiber_lambda(cache, orbit, position + j, lambda_n_max, lambda_tol,
                          true).value;
    if (!(lam[j] > 0.0)) {
      throw DegenerateSystemError("fiber multiplier vanished in the decay run");
    }
  }

  // mu at each forward position, shared by the correlation residuals.
  auto mu_at = [&](long pos, const GridFunction& f, const GridFunction& q) {
    const LambdaEstimate num = conformal_eval(cache, orbit, pos, f.multiply(q),
                                              MeasureKind::nu_open, lambda_n_max,
                                              lambda_tol);
    const LambdaEstimate den = conformal_eval(cache, orbit, pos, q,
                                              MeasureKind::nu_open, lambda_n_max,
                                              lambda_tol);
    if (!(den.value > 0.0)) {
      throw DegenerateSystemError("density has zero conformal mass");
    }
    return num.value / den.value;
  };

  for (const TestFunction& tf : battery) {
    DecaySeries series;
    series.id = tf.id;

    const LambdaEstimate nu_f = conformal_eval(cache, orbit, position, tf.f,
                                               MeasureKind::nu_open, lambda_n_max,
                                               lambda_tol);

    auto c_of = [&](const GridFunction& v, int n) {
      double c = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        c = std::max(c, std::abs(v[i] - nu_f.value * dens[n].q[i]));
      }
      return c;
    };

    GridFunction v = tf.f;
    series.c.push_back(c_of(v, 0));

    const double mu_f_base = mu_at(position, tf.f, dens[0].q);
    GridFunction w = tf.f.multiply(dens[0].q);
    const LambdaEstimate nu_q0 = conformal_eval(cache, orbit, position, dens[0].q,
                                                MeasureKind::nu_open, lambda_n_max,
                                                lambda_tol);
    series.correlation.push_back(
        std::abs(mu_at(position, tf.f.multiply(tf.f), dens[0].q) -
                 mu_f_base * mu_f_base));

    for (int n = 1; n <= depth; ++n) {
      v = apply(cache.at(orbit, position + n - 1, true), v).scaled(1.0 / lam[n - 1]);
      series.c.push_back(c_of(v, n));

      w = apply(cache.at(orbit, position + n - 1, true), w).scaled(1.0 / lam[n - 1]);
      const LambdaEstimate joint = conformal_eval(cache, orbit, position + n,
                                                  tf.f.multiply(w),
                                                  MeasureKind::nu_open,
                                                  lambda_n_max, lambda_tol);
      const double mu_joint = joint.value / nu_q0.value;
      const double mu_f_n = mu_at(position + n, tf.f, dens[n].q);
      series.correlation.push_back(std::abs(mu_joint - mu_f_n * mu_f_base));
    }

    // Geometric fit past the burn-in; the first sub-floor value truncates it.
    std::vector<double> xs, ys;
    for (int n = report.burn_in; n <= depth; ++n) {
      if (series.c[n] < report.floor) break;
      xs.push_back(static_cast<double>(n));
      ys.push_back(std::log(series.c[n]));
    }
    if (xs.size() >= 3) {
      const LinearFit fit = linear_fit(xs, ys);
      series.kappa = std::exp(fit.slope);
      series.r2 = fit.r2;
      series.log_intercept = fit.intercept;
      series.fitted = true;
    } else {
      // Too few points to fit: the run converged before a rate was visible.
      // That counts as exact convergence only if the tail sits at the floor.
      double tail = 0.0;
      for (int n = std::max(0, depth - 3); n <= depth; ++n) {
        tail = std::max(tail, series.c[n]);
      }
      series.exact = tail < report.floor;
    }
    report.series.push_back(std::move(series));
  }
  return report;
}

std::vector<ConditionalInvarianceRow> conditional_invariance_residual(
    const RandomOpenSystem& system, const MatrixCache& cache, const Orbit& orbit,
    long position, const std::vector<std::pair<std::string, IntervalSet>>& sets,
    int depth, int density_depth, int lambda_n_max, double lambda_tol) {
  bool affine = true;
  for (int s = 0; s < system.symbols(); ++s) {
    affine = affine && system.fiber(s).all_affine();
  }
  if (!affine || system.potential().kind() != PotentialKind::geometric ||
      system.potential().t() != 1.0) {
    throw NotAnalyticError(
        "the exact conditioned-mass route needs affine fibers at t = 1");
  }

  std::vector<DensityEstimate> dens;
  dens.reserve(depth + 1);
  for (int n = 0; n <= depth; ++n) {
    dens.push_back(invariant_density(cache, orbit, position + n, density_depth,
                                     lambda_n_max, lambda_tol));
  }
  std::vector<IntervalSet> survivors;
  survivors.reserve(depth + 1);
  for (int n = 0; n <= depth; ++n) {
    survivors.push_back(survivor_intervals(system, orbit, position, n));
  }

  std::vector<ConditionalInvarianceRow> rows;
  rows.reserve(sets.size());
  for (const auto& [id, a_set] : sets) {
    ConditionalInvarianceRow row;
    row.id = id;
    for (int n = 0; n <= depth; ++n) {
      // Pull A back n steps through the surviving dynamics.
      IntervalSet y = a_set.intersect(
          system.surviving_domain(orbit.symbol(position + n)));
      for (long j = position + n - 1; j >= position; --j) {
        y = fiber_pullback(system, orbit.symbol(j), y, true);
      }
      const double x_mass = survivors[n].total_length();
      if (!(x_mass > 0.0)) {
        throw DegenerateSystemError("survivor set lost all mass at depth " +
                                    std::to_string(n));
      }
      const double conditioned = y.total_length() / x_mass;
      const double eta = raccim_set_mass(
          system, dens[n].q, orbit.symbol(position + n), a_set);
      row.conditioned_mass.push_back(conditioned);
      row.residual.push_back(std::abs(conditioned - eta));
      if (n == depth) row.eta_limit = eta;
    }
    for (std::size_t n = 3; n + 1 < row.residual.size(); ++n) {
      if (row.residual[n + 1] > 1.05 * row.residual[n] + 1e-12) {
        row.monotone_after_burn_in = false;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

LyConstants ly_constants(const MatrixCache& cache, const RandomOpenSystem& system,
                         const Orbit& orbit, long position, int depth,
                         int lambda_n_max, double lambda_tol) {
  if (depth < 1) throw ConfigError("the variation inequality needs depth >= 1");
  LyConstants out;
  out.depth = depth;

  const std::vector<Cylinder> cyls =
      enumerate_cylinders(system, orbit, position, depth, true);
  if (cyls.empty()) {
    throw DegenerateSystemError("no surviving cylinders at this depth");
  }
  out.zeta = contiguous_nonfull_count(system, orbit, position, depth);
  out.g_sup = 0.0;
  out.g_inf_full = kInf;
  for (const Cylinder& z : cyls) {
    out.g_sup = std::max(out.g_sup, z.weight_hi);
    if (z.full) out.g_inf_full = std::min(out.g_inf_full, z.weight_lo);
  }
  if (!std::isfinite(out.g_inf_full)) {
    throw DegenerateSystemError(
        "no full cylinder survives at this depth; the minimal-mass bound is empty");
  }

  // Unnormalized sup of the closed n-step iterate of 1.
  {
    GridFunction v(cache.grid(), 1.0);
    double log_scale = 0.0;
    for (int j = 0; j < depth; ++j) {
      v = apply(cache.at(orbit, position + j, false), v);
      const double s = v.max();
      if (!(s > 0.0)) throw DegenerateSystemError("closed iterate vanished");
      log_scale += std::log(s);
      v = v.scaled(1.0 / s);
    }
    out.closed_sup = std::exp(log_scale);
  }
  out.delta_lower = out.g_inf_full / out.closed_sup;

  out.rho_lo = 1.0;
  out.rho_hi = 1.0;
  for (int j = 0; j < depth; ++j) {
    const LambdaEstimate lam = fiber_lambda(cache, orbit, position + j,
                                            lambda_n_max, lambda_tol, true);
    out.rho_lo *= std::max(lam.lower(), 0.0);
    out.rho_hi *= lam.upper();
  }
  if (!(out.rho_lo > 0.0)) {
    throw NumericsError("multiplier bracket reaches zero; deepen the functional run");
  }

  out.a = (9.0 + 16.0 * out.zeta) * out.g_sup;
  out.b = 8.0 * (2.0 * out.zeta + 1.0) * out.g_sup / out.delta_lower;
  out.q = out.a / out.rho_lo;
  out.k = out.b / out.rho_lo;
  return out;
}

ConditionReport condition_check(const RandomOpenSystem& system, int n_cap,
                                int covering_depth, std::uint64_t word_seed,
                                std::size_t word_cap) {
  if (n_cap < 1) throw ConfigError("the escalation cap must be at least 1");
  ConditionReport report;
  const DrivingSystem& driving = system.driving();
  const int symbols = system.symbols();

  report.full_branch_outside_hole = true;
  for (int s = 0; s < symbols; ++s) {
    bool ok = false;
    for (const Branch& br : system.fiber(s).branches()) {
      if (br.is_full() &&
          system.hole(s).set().overlap_length(br.lo(), br.hi()) <= 1e-12) {
        ok = true;
        break;
      }
    }
    report.full_branch_outside_hole = report.full_branch_outside_hole && ok;
  }

  report.zeta1.resize(symbols);
  report.hole_components.resize(symbols);
  report.mean_log_zeta_plus_2 = 0.0;
  for (int s = 0; s < symbols; ++s) {
    const Orbit single(std::vector<int>{s}, 0, 0);
    report.zeta1[s] = contiguous_nonfull_count(system, single, 0, 1);
    report.hole_components[s] = static_cast<int>(system.hole(s).components());
    report.mean_log_zeta_plus_2 +=
        driving.symbol_measure(s) * std::log(report.zeta1[s] + 2.0);
  }

  // Per-word statistics at escalation level n: oscillation of the n-step log
  // weight over the closed cylinders, minimal surviving preimage count, and
  // the within-cylinder weight distortion.
  struct WordStat {
    double osc = 0.0;
    double log_f = 0.0;
    bool dead = false;
    double distortion = 1.0;
  };
  auto word_stat = [&](const std::vector<int>& w) {
    WordStat st;
    const Orbit orbit(w, 0, 0);
    const int n = static_cast<int>(w.size());
    const std::vector<Cylinder> closed =
        enumerate_cylinders(system, orbit, 0, n, false);
    double w_hi = 0.0, w_lo = kInf;
    for (const Cylinder& z : closed) {
      w_hi = std::max(w_hi, z.weight_hi);
      w_lo = std::min(w_lo, z.weight_lo);
      st.distortion = std::max(
          st.distortion, z.weight_lo > 0.0 ? z.weight_hi / z.weight_lo : kInf);
    }
    st.osc = std::log(w_hi) - std::log(w_lo);
    const int f = min_preimage_count(system, orbit, 0, n);
    if (f < 1) {
      st.dead = true;
    } else {
      st.log_f = std::log(static_cast<double>(f));
    }
    return st;
  };

  for (int n = 1; n <= n_cap; ++n) {
    double total_words = 1.0;
    for (int j = 0; j < n; ++j) total_words *= symbols;

    double e_osc = 0.0, e_log_f = 0.0, level_distortion = 1.0;
    bool dead = false;

    if (total_words <= static_cast<double>(word_cap)) {
      std::vector<int> w(n, 0);
      while (true) {
        const double p = word_probability(driving, w);
        if (p > 0.0) {
          const WordStat st = word_stat(w);
          e_osc += p * st.osc;
          level_distortion = std::max(level_distortion, st.distortion);
          if (st.dead) {
            dead = true;
          } else {
            e_log_f += p * st.log_f;
          }
        }
        int j = n - 1;
        while (j >= 0 && w[j] == symbols - 1) w[j--] = 0;
        if (j < 0) break;
        ++w[j];
      }
    } else {
      report.monte_carlo_words = true;
      std::mt19937_64 rng(mix_seed(word_seed, static_cast<std::uint64_t>(n)));
      const int draws = 4096;
      for (int d = 0; d < draws; ++d) {
        std::vector<int> w(n);
        w[0] = draw_index(rng, driving.marginal());
        for (int j = 1; j < n; ++j) {
          w[j] = driving.kind() == DrivingKind::markov
                     ? draw_index(rng, driving.transition()[w[j - 1]])
                     : draw_index(rng, driving.marginal());
        }
        const WordStat st = word_stat(w);
        e_osc += st.osc / draws;
        level_distortion = std::max(level_distortion, st.distortion);
        if (st.dead) {
          dead = true;
        } else {
          e_log_f += st.log_f / draws;
        }
      }
    }

    report.birkhoff_osc = e_osc / n;
    report.mean_log_f = dead ? -kInf : e_log_f / n;
    report.q1_margin =
        report.mean_log_f - (report.birkhoff_osc + report.mean_log_zeta_plus_2);
    report.margins_tried.push_back(report.q1_margin);
    report.distortion = std::max(report.distortion, level_distortion);
    report.n1 = report.n2 = n;
    if (report.q1_margin > 0.0) {
      report.q1_pass = true;
      break;
    }
  }

  report.covering = covering_time_table(system, covering_depth);
  return report;
}

}  // namespace orim
