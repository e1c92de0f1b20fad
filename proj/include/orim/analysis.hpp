#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "orim/driving.hpp"
#include "orim/fit.hpp"
#include "orim/grid.hpp"
#include "orim/quenched.hpp"
#include "orim/system.hpp"
#include "orim/transfer.hpp"

namespace orim {

enum class PressureEstimator { sandwich, lambda_product, analytic };

std::string estimator_name(PressureEstimator e);
PressureEstimator estimator_from_name(const std::string& name);

struct EnsembleSettings {
  int orbits = 16;
  int depth = 30;
  std::uint64_t seed = 1;
  int threads = 1;
  int lambda_n_max = 30;
  double lambda_tol = 1e-9;
};

struct PressurePoint {
  double t = 1.0;
  double value = 0.0;
  double std_error = 0.0;  // sampling error across orbits; 0 for analytic
  double lower = 0.0;      // ensemble mean of the per-orbit lower exponent
  double upper = 0.0;      // ensemble mean of the per-orbit upper exponent
  int orbits = 0;
  int depth = 0;
  std::string estimator;
};

struct PressureCurve {
  std::vector<PressurePoint> points;
};

// Expected log fiber multiplier of the system as given (one potential). The
// sandwich estimator averages (1/2)[(1/n) log inf + (1/n) log sup] of the
// n-step open iterate of 1 over seeded orbits; lambda_product averages
// per-step functional multipliers; analytic uses the closed form and is only
// admissible for the full-branch affine whole-branch-hole class.
PressurePoint expected_pressure(const RandomOpenSystem& system, const GridPtr& grid,
                                const EnsembleSettings& settings,
                                PressureEstimator estimator, bool open = true);

// expected_pressure across a t-grid (geometric potentials).
PressureCurve pressure_curve(const RandomOpenSystem& system, const GridPtr& grid,
                             const std::vector<double>& t_grid,
                             const EnsembleSettings& settings,
                             PressureEstimator estimator);

struct EscapeReport {
  double slope = 0.0;  // decay rate of survivor reference mass
  double slope_r2 = 0.0;
  double pressure_difference = 0.0;  // EP(closed) - EP(open)
  double pressure_difference_error = 0.0;
  std::vector<std::vector<double>> masses;  // per orbit, survivor mass by depth
  int fit_from = 0;
  int depth = 0;
  bool agree = false;
  double tolerance = 0.0;
};

// Escape rate both ways: survivor-mass slope (exact interval masses at t = 1
// with affine fibers) against the closed/open pressure gap. The mass fit uses
// depths in [depth/2, depth]; depth shrinks automatically if the exact
// enumeration hits its component cap (at least 8 levels are required).
EscapeReport escape_rate(const RandomOpenSystem& system, const GridPtr& grid,
                         const EnsembleSettings& settings,
                         PressureEstimator estimator, double tolerance);

struct BisectionStep {
  double t = 0.0;
  double ep = 0.0;
  double std_error = 0.0;
  int orbits = 0;
};

struct DimensionReport {
  double h = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  bool boundary_low = false;   // EP(0) <= 0
  bool boundary_high = false;  // EP(1) >= 0
  std::string method;
  std::vector<BisectionStep> steps;
};

// Zero of t -> EP(t) over [0, 1]. The analytic path bisects the closed form
// to 1e-12. The Monte Carlo path decides each sign with a 95% CI, doubling
// the orbit count until the CI excludes zero (cap 2^16 orbits, then
// InconclusiveError), and stops at bracket width tol_t.
DimensionReport bowen_dimension(const RandomOpenSystem& system, const GridPtr& grid,
                                const EnsembleSettings& settings,
                                PressureEstimator estimator, double tol_t,
                                int orbit_cap = 1 << 16);

struct DecaySeries {
  std::string id;
  std::vector<double> c;  // sup-norm distance to the conformal projection
  double kappa = 0.0;
  double r2 = 0.0;
  double log_intercept = 0.0;
  bool fitted = false;
  bool exact = false;  // series at the floor after burn-in: converged exactly
  std::vector<double> correlation;  // |mu((f o T^n) f) - mu(f) mu(f)|
};

struct DecayReport {
  std::vector<DecaySeries> series;
  int burn_in = 3;
  double floor = 1e-14;
  int depth = 0;
};

// Normalized-iterate convergence per battery function: C_n = sup norm of
// (lambda-product)^{-1} L^n f - nu(f) q at position + n, fitted geometrically
// past the burn-in; values under the floor truncate the fit. Also reports the
// autocorrelation residuals through the same iterates.
DecayReport decay_fit(const MatrixCache& cache, const Orbit& orbit, long position,
                      const std::vector<TestFunction>& battery, int depth,
                      int density_depth, int lambda_n_max, double lambda_tol);

struct ConditionalInvarianceRow {
  std::string id;
  std::vector<double> conditioned_mass;  // closed reference mass of T^-n A in X_n
  std::vector<double> residual;          // distance to eta(A) one step ahead
  double eta_limit = 0.0;
  bool monotone_after_burn_in = true;
};

// Exact interval route (affine fibers, t = 1): conditioned survivor masses of
// the pulled-back sets against the raccim mass of A at the shifted position.
std::vector<ConditionalInvarianceRow> conditional_invariance_residual(
    const RandomOpenSystem& system, const MatrixCache& cache, const Orbit& orbit,
    long position, const std::vector<std::pair<std::string, IntervalSet>>& sets,
    int depth, int density_depth, int lambda_n_max, double lambda_tol);

struct LyConstants {
  int depth = 0;
  int zeta = 0;           // contiguous non-full cylinder bound at this depth
  double g_sup = 0.0;     // sup of the n-step weight
  double g_inf_full = 0.0;  // inf of the n-step weight over full cylinders
  double closed_sup = 0.0;  // sup of the closed n-step iterate of 1
  double delta_lower = 0.0; // lower bound for the minimal full-cylinder mass
  double rho_lo = 0.0, rho_hi = 0.0;  // n-step multiplier bracket
  double a = 0.0, b = 0.0;  // variation inequality coefficients
  double q = 0.0, k = 0.0;  // normalized coefficients A/rho^n, B/rho^n
};

// Lasota-Yorke coefficients at one orbit position and depth:
//   A = (9 + 16 zeta) sup g,   B = 8 (2 zeta + 1) sup g / delta,
// with delta lower-bounded by inf g / sup L_c^n 1 over full cylinders and
// rho^n the product of per-step multiplier brackets.
LyConstants ly_constants(const MatrixCache& cache, const RandomOpenSystem& system,
                         const Orbit& orbit, long position, int depth,
                         int lambda_n_max, double lambda_tol);

struct ConditionReport {
  bool full_branch_outside_hole = false;
  std::vector<int> zeta1;            // per symbol
  std::vector<int> hole_components;  // per symbol
  double mean_log_zeta_plus_2 = 0.0;
  double birkhoff_osc = 0.0;  // (1/N1) E[sup - inf of the N1-step log weight]
  double mean_log_f = 0.0;    // (1/N2) E[log min preimage count]
  double q1_margin = 0.0;     // mean_log_f - (birkhoff_osc + mean_log_zeta_plus_2)
  bool q1_pass = false;
  int n1 = 1, n2 = 1;
  std::vector<double> margins_tried;  // margin per escalation level (n = 1, 2, ...)
  std::vector<int> covering;          // worst covering time per depth
  double distortion = 1.0;            // max within-cylinder weight ratio
  bool monte_carlo_words = false;
};

// Verifiable sufficient conditions: per-fiber full-branch check, hole
// component counts, the expected-value inequality between branch richness and
// weight oscillation (escalating the depth until it passes or the cap is
// reached), covering times, and the distortion of the n-step weights. Word
// expectations enumerate exactly up to 1e6 words, then fall back to seeded
// Monte Carlo with the flag set.
ConditionReport condition_check(const RandomOpenSystem& system, int n_cap = 4,
                                int covering_depth = 3,
                                std::uint64_t word_seed = 9001,
                                std::size_t word_cap = 1'000'000);

}  // namespace orim
