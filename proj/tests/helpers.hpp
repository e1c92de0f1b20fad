#pragma once

// Shared builders and random generators for the test suites. Every
// constructed system here is a concrete, fully specified example whose
// exact constants are computed in-line where a test needs them.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "orim/driving.hpp"
#include "orim/grid.hpp"
#include "orim/interval_set.hpp"
#include "orim/system.hpp"

namespace orim::testing {

// T(x) = 3x mod 1 with the middle-third hole, single driving symbol.
// Survivor sets are the standard middle-thirds construction; the per-step
// multiplier at t = 1 is exactly 2/3.
inline RandomOpenSystem cantor_system(double t = 1.0) {
  const double a = 1.0 / 3.0, b = 2.0 / 3.0;
  return build_affine_ly_system(
      DrivingSystem::iid({1.0}), {{0.0, a, b, 1.0}}, {{3.0, 3.0, 3.0}},
      {IntervalSet::single(a, b)}, Potential::geometric(t));
}

// Same map with no hole: closed tripling.
inline RandomOpenSystem tripling_closed(double t = 1.0) {
  const double a = 1.0 / 3.0, b = 2.0 / 3.0;
  return build_affine_ly_system(DrivingSystem::iid({1.0}),
                                {{0.0, a, b, 1.0}}, {{3.0, 3.0, 3.0}},
                                {IntervalSet{}}, Potential::geometric(t));
}

// Doubling map, no hole, single symbol.
inline RandomOpenSystem doubling_closed(double t = 1.0) {
  return build_affine_ly_system(DrivingSystem::iid({1.0}), {{0.0, 0.5, 1.0}},
                                {{2.0, 2.0}}, {IntervalSet{}},
                                Potential::geometric(t));
}

// beta in {2, 4}, fair i.i.d. driving, hole = last branch domain of each
// fiber. All branches are full and every hole is a whole branch domain, so
// the fiber multiplier is constant per symbol: 1/2 for beta=2, 3/4 for
// beta=4 at t = 1.
inline RandomOpenSystem beta24_system(double t = 1.0) {
  return build_beta_system(DrivingSystem::iid({0.5, 0.5}), {2.0, 4.0},
                           {IntervalSet::single(0.5, 1.0),
                            IntervalSet::single(0.75, 1.0)},
                           Potential::geometric(t));
}

// Two-fiber piecewise-affine family with uneven slopes and one interior
// hole per fiber; hole endpoints sit on the dyadic lattice so grids of
// resolution >= 16 represent them exactly. Fiber 0: slopes (2, 2), hole
// [1/4, 3/8). Fiber 1: slopes (10/3, 10/7) with breakpoint 0.3, hole
// [5/8, 11/16).
inline RandomOpenSystem ly_two_fiber_system(double t = 1.0) {
  return build_affine_ly_system(
      DrivingSystem::iid({0.5, 0.5}), {{0.0, 0.5, 1.0}, {0.0, 0.3, 1.0}},
      {{2.0, 2.0}, {10.0 / 3.0, 10.0 / 7.0}},
      {IntervalSet::single(0.25, 0.375), IntervalSet::single(0.625, 0.6875)},
      Potential::geometric(t));
}

// Five equal full branches, hole = last branch domain. The one-step
// surviving preimage count is 4 everywhere while zeta = 0, so the
// first-level margin log 4 - log 2 is strictly positive.
inline RandomOpenSystem five_branch_system(double t = 1.0) {
  return build_beta_system(DrivingSystem::iid({1.0}), {5.0},
                           {IntervalSet::single(0.8, 1.0)},
                           Potential::geometric(t));
}

inline double urand(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int irand(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Random i.i.d. or Markov driving over 1..3 symbols with probabilities
// bounded away from zero.
inline DrivingSystem random_driving(std::mt19937_64& rng, int max_symbols = 3) {
  const int s = irand(rng, 1, max_symbols);
  std::vector<double> w(s);
  double total = 0.0;
  for (double& x : w) {
    x = urand(rng, 0.2, 1.0);
    total += x;
  }
  for (double& x : w) x /= total;
  // Exact renormalization: force the sum to 1 in floating point.
  double acc = std::accumulate(w.begin(), w.end(), 0.0);
  w.back() += 1.0 - acc;
  if (s == 1 || irand(rng, 0, 1) == 0) return DrivingSystem::iid(w);
  // Markov chain with stationary law w: pick a symmetric-ish transition by
  // Metropolis weights, then re-derive the stationary vector numerically.
  std::vector<std::vector<double>> p(s, std::vector<double>(s));
  for (int i = 0; i < s; ++i) {
    double row = 0.0;
    for (int j = 0; j < s; ++j) {
      p[i][j] = urand(rng, 0.2, 1.0);
      row += p[i][j];
    }
    for (int j = 0; j < s; ++j) p[i][j] /= row;
    double racc = std::accumulate(p[i].begin(), p[i].end(), 0.0);
    p[i][s - 1] += 1.0 - racc;
  }
  // Power-iterate the row-stochastic matrix to its stationary vector.
  std::vector<double> pi(s, 1.0 / s), nxt(s);
  for (int it = 0; it < 20000; ++it) {
    for (int j = 0; j < s; ++j) {
      nxt[j] = 0.0;
      for (int i = 0; i < s; ++i) nxt[j] += pi[i] * p[i][j];
    }
    pi.swap(nxt);
  }
  double pacc = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (double& x : pi) x /= pacc;
  pi.back() += 1.0 - std::accumulate(pi.begin(), pi.end(), 0.0);
  return DrivingSystem::markov(p, pi);
}

// Random full-branch piecewise-affine system. Each fiber has 2..4 full
// branches with random widths (>= 0.08) and random orientations. When
// with_holes is set, each fiber independently gets either no hole or one
// interior subinterval of a branch other than a designated protected full
// branch, so the full-branch-outside-hole guarantee always holds.
inline RandomOpenSystem random_affine_system(std::mt19937_64& rng,
                                             bool with_holes,
                                             double t = 1.0,
                                             int max_symbols = 3) {
  DrivingSystem driving = random_driving(rng, max_symbols);
  const int s = driving.symbols();
  std::vector<std::vector<double>> breaks(s), slopes(s);
  std::vector<IntervalSet> holes(s);
  for (int i = 0; i < s; ++i) {
    const int m = irand(rng, 2, 4);
    std::vector<double> w(m);
    double total = 0.0;
    for (double& x : w) {
      x = urand(rng, 0.4, 1.0);
      total += x;
    }
    breaks[i].push_back(0.0);
    double acc = 0.0;
    for (int j = 0; j < m - 1; ++j) {
      acc += w[j] / total;
      breaks[i].push_back(acc);
    }
    breaks[i].push_back(1.0);
    for (int j = 0; j < m; ++j) {
      const double width = breaks[i][j + 1] - breaks[i][j];
      const double mag = 1.0 / width;  // full branch
      const bool descending = irand(rng, 0, 4) == 0;
      slopes[i].push_back(descending ? -mag : mag);
    }
    if (with_holes && irand(rng, 0, 1) == 0) {
      const int protect = irand(rng, 0, m - 1);
      int victim = irand(rng, 0, m - 1);
      if (victim == protect) victim = (victim + 1) % m;
      const double lo = breaks[i][victim], hi = breaks[i][victim + 1];
      const double width = hi - lo;
      const double a = lo + urand(rng, 0.05, 0.45) * width;
      const double b = a + urand(rng, 0.1, 0.5) * (hi - a);
      holes[i] = IntervalSet::single(a, b);
    }
  }
  return build_affine_ly_system(driving, breaks, slopes, holes,
                                Potential::geometric(t));
}

// Random beta-map family: betas in [1.3, 4.7] (last branch usually not
// full). Holes, when requested, sit strictly inside the last branch, so the
// first (full) branch always survives intact.
inline RandomOpenSystem random_beta_system(std::mt19937_64& rng,
                                           bool with_holes, double t = 1.0,
                                           int max_symbols = 2) {
  DrivingSystem driving = random_driving(rng, max_symbols);
  const int s = driving.symbols();
  std::vector<double> betas(s);
  std::vector<IntervalSet> holes(s);
  for (int i = 0; i < s; ++i) {
    betas[i] = urand(rng, 1.3, 4.7);
    if (with_holes && irand(rng, 0, 1) == 0) {
      // Hole strictly inside the last branch [k/beta, 1]; the first branch
      // [0, 1/beta) is full and untouched.
      const int k = static_cast<int>(std::ceil(betas[i])) - 1;
      const double lo = k / betas[i];
      const double a = lo + urand(rng, 0.1, 0.5) * (1.0 - lo);
      const double b = a + urand(rng, 0.1, 0.8) * (1.0 - a);
      if (b - a > 1e-3) holes[i] = IntervalSet::single(a, b);
    }
  }
  return build_beta_system(driving, betas, holes, Potential::geometric(t));
}

// Random piecewise-constant-plus-ramp test vector with a controlled number
// of jumps; values in [lo, hi].
inline GridFunction random_bv_function(std::mt19937_64& rng,
                                       const GridPtr& grid, double lo,
                                       double hi) {
  const std::size_t n = grid->cells();
  std::vector<double> v(n);
  const int segments = irand(rng, 1, 6);
  std::vector<std::size_t> cuts = {0, n};
  for (int j = 1; j < segments; ++j)
    cuts.push_back(static_cast<std::size_t>(irand(rng, 1, static_cast<int>(n) - 1)));
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double base = urand(rng, lo, hi);
    const double slope = urand(rng, -0.5, 0.5) * (hi - lo);
    const std::size_t a = cuts[c], b = cuts[c + 1];
    for (std::size_t i = a; i < b; ++i) {
      const double frac = b > a + 1 ? double(i - a) / double(b - a - 1) : 0.0;
      v[i] = std::clamp(base + slope * frac, lo, hi);
    }
  }
  return GridFunction(grid, std::move(v));
}

// Random interval set with 1..4 disjoint components, endpoints separated by
// at least min_gap.
inline IntervalSet random_interval_set(std::mt19937_64& rng, int max_parts = 4,
                                       double min_gap = 1e-4) {
  const int parts = irand(rng, 1, max_parts);
  std::vector<double> pts(2 * parts);
  bool ok = false;
  while (!ok) {
    for (double& x : pts) x = urand(rng, 0.0, 1.0);
    std::sort(pts.begin(), pts.end());
    ok = true;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      if (pts[i + 1] - pts[i] < min_gap) ok = false;
  }
  IntervalSet out;
  for (int p = 0; p < parts; ++p)
    out = out.unite(IntervalSet::single(pts[2 * p], pts[2 * p + 1]));
  return out;
}

}  // namespace orim::testing
