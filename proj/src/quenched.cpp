#include "orim/quenched.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "orim/errors.hpp"
#include "orim/oracle.hpp"

namespace orim {

namespace {

constexpr double kMonotoneSlack = 1e-9;

GridFunction start_indicator(const MatrixCache& cache, int symbol, bool open) {
  if (!open) return GridFunction(cache.grid(), 1.0);
  return indicator(cache.grid(), cache.system().surviving_domain(symbol));
}

struct RatioExtremes {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t cells = 0;
};

RatioExtremes masked_ratios(const GridFunction& num, const GridFunction& den) {
  RatioExtremes r;
  for (std::size_t i = 0; i < den.size(); ++i) {
    if (den[i] <= 0.0) continue;
    double v = num[i] / den[i];
    r.lo = std::min(r.lo, v);
    r.hi = std::max(r.hi, v);
    ++r.cells;
  }
  return r;
}

LambdaEstimate functional_core(const MatrixCache& cache, const Orbit& orbit,
                               long position, const GridFunction& f, int n_max,
                               double tol, bool open) {
  if (n_max < 0) throw DomainError("functional iteration: negative n_max");
  GridFunction num = f;
  GridFunction den = start_indicator(cache, orbit.symbol(position), open);
  LambdaEstimate est;
  for (int n = 0;; ++n) {
    RatioExtremes r = masked_ratios(num, den);
    if (r.cells == 0) {
      throw DegenerateSystemError(
          "functional iteration: support died after " + std::to_string(n) +
          " steps");
    }
    if (!est.trace.min_ratio.empty()) {
      double slack = kMonotoneSlack * (1.0 + std::fabs(r.lo) + std::fabs(r.hi));
      if (r.lo < est.trace.min_ratio.back() - slack ||
          r.hi > est.trace.max_ratio.back() + slack) {
        throw NumericsError("functional iteration: ratio bracket widened");
      }
    }
    est.trace.min_ratio.push_back(r.lo);
    est.trace.max_ratio.push_back(r.hi);
    est.trace.support_cells.push_back(r.cells);
    est.iterations = n;
    if (r.hi - r.lo <= tol || n == n_max) break;
    const TransferMatrix& m = cache.at(orbit, position + n, open);
    num = apply(m, num);
    den = apply(m, den);
    double scale = den.sup_abs();
    if (scale <= 0.0) {
      throw DegenerateSystemError("functional iteration: denominator vanished");
    }
    num = num.scaled(1.0 / scale);
    den = den.scaled(1.0 / scale);
  }
  double lo = est.trace.min_ratio.back();
  double hi = est.trace.max_ratio.back();
  est.value = 0.5 * (lo + hi);
  est.error = hi - lo;
  return est;
}

}  // namespace

LambdaEstimate functional_lambda(const MatrixCache& cache, const Orbit& orbit,
                                 long position, const GridFunction& f,
                                 int n_max, double tol, bool open) {
  return functional_core(cache, orbit, position, f, n_max, tol, open);
}

LambdaEstimate fiber_lambda(const MatrixCache& cache, const Orbit& orbit,
                            long position, int n_max, double tol, bool open) {
  GridFunction one = start_indicator(cache, orbit.symbol(position), open);
  GridFunction image = apply(cache.at(orbit, position, open), one);
  return functional_core(cache, orbit, position + 1, image, n_max, tol, open);
}

LambdaEstimate conformal_eval(const MatrixCache& cache, const Orbit& orbit,
                              long position, const GridFunction& f,
                              MeasureKind kind, int n_max, double tol) {
  if (kind == MeasureKind::mu || kind == MeasureKind::eta) {
    throw ConfigError(
        "conformal_eval: mu and eta have dedicated evaluation paths");
  }
  return functional_core(cache, orbit, position, f, n_max, tol,
                         kind == MeasureKind::nu_open);
}

SupportMask propagate_support(const TransferMatrix& m, const SupportMask& mask) {
  SupportMask out;
  out.on.assign(mask.on.size(), 0);
  for (int row = 0; row < m.mat.outerSize(); ++row) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m.mat, row);
         it; ++it) {
      if (it.value() > 0.0 && mask.on[static_cast<std::size_t>(it.col())]) {
        out.on[static_cast<std::size_t>(row)] = 1;
        break;
      }
    }
  }
  for (auto v : out.on) out.count += v;
  return out;
}

DensityEstimate invariant_density(const MatrixCache& cache, const Orbit& orbit,
                                  long position, int depth, int lambda_n_max,
                                  double lambda_tol) {
  if (depth < 1) throw DomainError("invariant_density: depth must be >= 1");

  auto iterate_from = [&](long start, int steps) {
    GridFunction v(cache.grid(), 1.0);
    for (int k = 0; k < steps; ++k) {
      v = apply(cache.at(orbit, start + k, true), v);
      double scale = v.sup_abs();
      if (scale <= 0.0) {
        throw DegenerateSystemError("invariant_density: iterate vanished");
      }
      v = v.scaled(1.0 / scale);
    }
    return v;
  };

  auto normalize = [&](GridFunction v, double* rel_err) {
    LambdaEstimate lam =
        functional_lambda(cache, orbit, position, v, lambda_n_max, lambda_tol);
    if (lam.value <= 0.0) {
      throw DegenerateSystemError("invariant_density: functional value is zero");
    }
    if (rel_err) *rel_err = lam.error / lam.value;
    return v.scaled(1.0 / lam.value);
  };

  DensityEstimate out = {.q = GridFunction(cache.grid(), 0.0),
                         .residual = 0.0,
                         .lambda_check_error = 0.0,
                         .d_mask = {},
                         .d_stabilized = false,
                         .depth = 0,
                         .min_on_mask = 0.0};
  double rel_err = 0.0;
  GridFunction q_n = normalize(iterate_from(position - depth, depth), &rel_err);
  GridFunction q_prev =
      depth == 1 ? normalize(start_indicator(cache, orbit.symbol(position), true), nullptr)
                 : normalize(iterate_from(position - depth + 1, depth - 1), nullptr);
  double residual = 0.0;
  for (std::size_t i = 0; i < q_n.size(); ++i) {
    residual = std::max(residual, std::fabs(q_n[i] - q_prev[i]));
  }

  // Finite-depth support masks at `position`; each extra backward step can
  // only shrink them.
  std::vector<SupportMask> masks;
  masks.push_back(start_indicator(cache, orbit.symbol(position), true).support());
  for (int k = 1; k <= depth; ++k) {
    SupportMask m;
    m.on.assign(cache.grid()->cells(), 1);
    m.count = m.on.size();
    for (long j = position - k; j < position; ++j) {
      m = propagate_support(cache.at(orbit, j, true), m);
    }
    masks.push_back(std::move(m));
  }
  bool stabilized = false;
  for (std::size_t k = 0; k + 4 < masks.size(); ++k) {
    bool flat = true;
    for (std::size_t j = k; j < k + 4; ++j) {
      flat = flat && masks[j] == masks[j + 1];
    }
    if (flat) {
      stabilized = true;
      break;
    }
  }

  out.q = std::move(q_n);
  out.residual = residual;
  out.lambda_check_error = rel_err;
  out.d_mask = masks.back();
  out.d_stabilized = stabilized;
  out.depth = depth;
  double mn = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.q.size(); ++i) {
    if (out.d_mask.on[i]) mn = std::min(mn, out.q[i]);
  }
  out.min_on_mask = std::isfinite(mn) ? mn : 0.0;
  return out;
}

namespace {

// Quotient of two bracketed values with positive denominator bracket.
void bracket_quotient(const LambdaEstimate& num, const LambdaEstimate& den,
                      double* value, double* error) {
  if (den.lower() <= 0.0) {
    throw NumericsError("bracket quotient: denominator bracket touches zero");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double a : {num.lower(), num.upper()}) {
    for (double b : {den.lower(), den.upper()}) {
      lo = std::min(lo, a / b);
      hi = std::max(hi, a / b);
    }
  }
  *value = 0.5 * (lo + hi);
  *error = hi - lo;
}

}  // namespace

MeasureEstimate invariant_measure_eval(const MatrixCache& cache,
                                       const Orbit& orbit, long position,
                                       const DensityEstimate& density,
                                       const std::vector<TestFunction>& battery,
                                       int n_max, double tol) {
  MeasureEstimate out;
  out.kind = MeasureKind::mu;
  LambdaEstimate den = conformal_eval(cache, orbit, position, density.q,
                                      MeasureKind::nu_open, n_max, tol);
  for (const auto& tf : battery) {
    LambdaEstimate num =
        conformal_eval(cache, orbit, position, tf.f.multiply(density.q),
                       MeasureKind::nu_open, n_max, tol);
    MeasureValue v;
    v.id = tf.id;
    bracket_quotient(num, den, &v.value, &v.error);
    out.values.push_back(std::move(v));
  }
  return out;
}

double raccim_set_mass(const RandomOpenSystem& system, const GridFunction& q,
                       int symbol, const IntervalSet& set) {
  const Grid& grid = *q.grid();
  IntervalSet inside = set.intersect(system.surviving_domain(symbol));
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    num += q[i] * inside.overlap_length(grid.left(i), grid.right(i));
    den += q[i] * system.surviving_domain(symbol).overlap_length(grid.left(i),
                                                                 grid.right(i));
  }
  if (den <= 0.0) {
    throw DegenerateSystemError("raccim_set_mass: zero reference mass");
  }
  return num / den;
}

RaccimEstimate raccim_eval(const MatrixCache& cache,
                           const RandomOpenSystem& system, const Orbit& orbit,
                           long position, const DensityEstimate& density_here,
                           const DensityEstimate& density_next,
                           const std::vector<TestFunction>& battery, int n_max,
                           double tol) {
  RaccimEstimate out;
  out.eta.kind = MeasureKind::eta;
  const GridPtr& grid = cache.grid();
  int s_here = orbit.symbol(position);
  int s_next = orbit.symbol(position + 1);
  GridFunction ind_here = indicator(grid, system.surviving_domain(s_here));
  GridFunction ind_next = indicator(grid, system.surviving_domain(s_next));
  GridFunction w = density_here.q.multiply(ind_here);

  const bool exact = system.potential().kind() == PotentialKind::geometric &&
                     system.potential().t() == 1.0 &&
                     [&] {
                       for (int s = 0; s < system.symbols(); ++s) {
                         if (!system.fiber(s).all_affine()) return false;
                       }
                       return true;
                     }();
  out.exact_reference = exact;

  double c_here, c_next, lambda_c;
  LambdaEstimate c_here_br, c_next_br;
  if (exact) {
    c_here = w.integral();
    c_next = density_next.q.multiply(ind_next).integral();
    lambda_c = 1.0;
  } else {
    c_here_br = conformal_eval(cache, orbit, position, w, MeasureKind::nu_closed,
                               n_max, tol);
    c_next_br = conformal_eval(cache, orbit, position + 1,
                               density_next.q.multiply(ind_next),
                               MeasureKind::nu_closed, n_max, tol);
    c_here = c_here_br.value;
    c_next = c_next_br.value;
    lambda_c = fiber_lambda(cache, orbit, position, n_max, tol, false).value;
  }
  if (c_here <= 0.0 || c_next <= 0.0) {
    throw DegenerateSystemError("raccim_eval: reference mass vanished");
  }

  for (const auto& tf : battery) {
    MeasureValue v;
    v.id = tf.id;
    if (exact) {
      double num = tf.f.multiply(w).integral();
      v.value = num / c_here;
      // q is known to +-residual in sup norm; propagate through both the
      // numerator and the normalization.
      double abs_f_mass = 0.0, ind_mass = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        abs_f_mass += std::fabs(tf.f[i]) * ind_here[i] * grid->width(i);
        ind_mass += ind_here[i] * grid->width(i);
      }
      v.error = density_here.residual *
                (abs_f_mass + std::fabs(v.value) * ind_mass) / c_here;
    } else {
      LambdaEstimate num =
          conformal_eval(cache, orbit, position, tf.f.multiply(w),
                         MeasureKind::nu_closed, n_max, tol);
      bracket_quotient(num, c_here_br, &v.value, &v.error);
    }
    out.eta.values.push_back(std::move(v));
  }

  IntervalSet x1 = survivor_intervals(system, orbit, position, 1);
  if (exact) {
    out.alpha = raccim_set_mass(system, density_here.q, s_here, x1);
    out.alpha_error = 2.0 * density_here.residual;
  } else {
    GridFunction cov = coverage(grid, x1);
    LambdaEstimate num =
        conformal_eval(cache, orbit, position, cov.multiply(w),
                       MeasureKind::nu_closed, n_max, tol);
    bracket_quotient(num, c_here_br, &out.alpha, &out.alpha_error);
  }

  GridFunction lhs = apply(cache.at(orbit, position, true), density_here.q);
  double factor = lambda_c * out.alpha * c_here / c_next;
  double residual = 0.0;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    if (ind_next[i] <= 0.0) continue;
    residual = std::max(residual,
                        std::fabs(lhs[i] - factor * density_next.q[i]));
  }
  out.defining_residual = residual;
  return out;
}

}  // namespace orim
