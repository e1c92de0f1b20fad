#pragma once

#include <string>
#include <vector>

#include "orim/driving.hpp"
#include "orim/grid.hpp"
#include "orim/interval_set.hpp"
#include "orim/transfer.hpp"

namespace orim {

// Ratio bracket trace of one functional iteration. The masked min ratio is
// nondecreasing and the masked max ratio nonincreasing (checked during the
// run, 1e-12 relative slack for round-off).
struct RatioSequence {
  std::vector<double> min_ratio;
  std::vector<double> max_ratio;
  std::vector<std::size_t> support_cells;

  double width(std::size_t i) const { return max_ratio[i] - min_ratio[i]; }
};

struct LambdaEstimate {
  double value = 0.0;  // bracket midpoint
  double error = 0.0;  // bracket width
  int iterations = 0;
  RatioSequence trace;

  double lower() const { return value - 0.5 * error; }
  double upper() const { return value + 0.5 * error; }
};

// The direction-limit functional at one orbit position evaluated on f:
// iterate numerator L^n f and denominator L^n 1 together and bracket the
// limit by the masked ratio extremes. Signed f is handled directly (the
// bracket shifts exactly under f -> f + c). openness false runs the
// hole-free cocycle. Throws DegenerateSystemError when the denominator
// support dies.
LambdaEstimate functional_lambda(const MatrixCache& cache, const Orbit& orbit,
                                 long position, const GridFunction& f,
                                 int n_max, double tol, bool open = true);

// Fiber multiplier at one position: the functional at position + 1 applied
// to the one-step image of the fiber indicator.
LambdaEstimate fiber_lambda(const MatrixCache& cache, const Orbit& orbit,
                            long position, int n_max, double tol,
                            bool open = true);

enum class MeasureKind { nu_open, nu_closed, mu, eta };

// Conformal mass of f at one position, as a bracketed value. nu_closed uses
// the hole-free cocycle (Lebesgue for affine fibers at t = 1).
LambdaEstimate conformal_eval(const MatrixCache& cache, const Orbit& orbit,
                              long position, const GridFunction& f,
                              MeasureKind kind, int n_max, double tol);

struct DensityEstimate {
  GridFunction q;
  // Sup distance between the depth-n and depth-(n-1) normalized iterates.
  double residual = 0.0;
  // Relative bracket width of the normalizing functional value.
  double lambda_check_error = 0.0;
  SupportMask d_mask;
  bool d_stabilized = false;
  int depth = 0;
  double min_on_mask = 0.0;
};

// Backward iterate of 1 from position - depth, normalized so the functional
// value at `position` is 1. The reported mask is the finite-depth support
// D_{position,k} once unchanged for 5 consecutive k.
DensityEstimate invariant_density(const MatrixCache& cache, const Orbit& orbit,
                                  long position, int depth, int lambda_n_max,
                                  double lambda_tol);

struct MeasureValue {
  std::string id;
  double value = 0.0;
  double error = 0.0;
};

struct MeasureEstimate {
  MeasureKind kind = MeasureKind::nu_open;
  std::vector<MeasureValue> values;
};

struct TestFunction {
  std::string id;
  GridFunction f;
};

// mu(f) = nu(f q) / nu(q) with interval-propagated errors.
MeasureEstimate invariant_measure_eval(const MatrixCache& cache,
                                       const Orbit& orbit, long position,
                                       const DensityEstimate& density,
                                       const std::vector<TestFunction>& battery,
                                       int n_max, double tol);

struct RaccimEstimate {
  MeasureEstimate eta;
  // Mass of the depth-1 survivor set under eta.
  double alpha = 0.0;
  double alpha_error = 0.0;
  // Sup-norm defect of L(q 1) = lambda_c alpha (c/c') q' on the surviving
  // cells one step ahead.
  double defining_residual = 0.0;
  bool exact_reference = false;  // t = 1 affine: closed masses are Lebesgue-exact
};

// eta(f) = nu_c(f 1 q) / nu_c(1 q) at one position, with alpha and the
// one-step defining-relation residual. Needs densities at `position` and
// `position + 1`.
RaccimEstimate raccim_eval(const MatrixCache& cache,
                           const RandomOpenSystem& system, const Orbit& orbit,
                           long position, const DensityEstimate& density_here,
                           const DensityEstimate& density_next,
                           const std::vector<TestFunction>& battery, int n_max,
                           double tol);

// eta mass of an arbitrary interval set (exact cell overlaps against the
// density; t = 1 affine only).
double raccim_set_mass(const RandomOpenSystem& system, const GridFunction& q,
                       int symbol, const IntervalSet& set);

// Support mask evolution of the open cocycle: image of `mask` under the
// sparsity pattern of the matrix at `position`.
SupportMask propagate_support(const TransferMatrix& m, const SupportMask& mask);

}  // namespace orim
