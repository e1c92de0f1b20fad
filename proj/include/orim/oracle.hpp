#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "orim/driving.hpp"
#include "orim/fit.hpp"
#include "orim/interval_set.hpp"
#include "orim/system.hpp"

namespace orim {

// Exact-arithmetic reference machinery. Everything here works on interval
// endpoints and preimage trees directly, independent of any grid, so the
// discretized estimators can be checked against it.

inline constexpr std::size_t kOracleComponentCap = 10'000'000;

// Closed one-step preimage T_s^{-1}(S); open_flag additionally removes the
// fiber's hole from the result.
IntervalSet fiber_pullback(const RandomOpenSystem& system, int symbol,
                           const IntervalSet& set, bool open_flag);

// Survivor set at depth n: points whose first n+1 iterates (exponents
// 0..n) stay outside the holes along the orbit. Backward recursion
//   X_{p,0} = I_p \ H_p,   X_{p,n} = (I_p \ H_p) ∩ T_p^{-1}(X_{p+1,n-1}).
// Throws DepthError when the interval list exceeds the component cap.
IntervalSet survivor_intervals(const RandomOpenSystem& system, const Orbit& orbit,
                               long position, int depth,
                               std::size_t component_cap = kOracleComponentCap);

// (L^n f)(y) by explicit preimage-tree summation; n is capped at 15.
double point_transfer(const RandomOpenSystem& system, const Orbit& orbit,
                      long position, int depth,
                      const std::function<double(double)>& f, double y,
                      bool open_flag);

// One monotonicity cylinder of the n-step map: x-interval, forward image,
// weight bounds of the n-step weight on it, branch word.
struct Cylinder {
  double a = 0.0, b = 0.0;
  double img_lo = 0.0, img_hi = 0.0;
  double weight_lo = 0.0, weight_hi = 0.0;
  bool full = false;
  std::vector<int> word;
};

// Depth-n cylinders sorted by position. open_flag prunes by the holes at
// steps 0..n-1, which leaves exactly the cylinders carried by the depth-(n-1)
// survivor set.
std::vector<Cylinder> enumerate_cylinders(
    const RandomOpenSystem& system, const Orbit& orbit, long position, int depth,
    bool open_flag, std::size_t component_cap = kOracleComponentCap);

// Largest run of consecutive non-full cylinders in the sorted open
// enumeration. Gaps left by hole pullbacks separate nothing: the count treats
// the surviving cylinders as an ordered list.
int contiguous_nonfull_count(const RandomOpenSystem& system, const Orbit& orbit,
                             long position, int depth,
                             std::size_t component_cap = kOracleComponentCap);

// Minimum over y of the number of surviving n-step preimages of y.
int min_preimage_count(const RandomOpenSystem& system, const Orbit& orbit,
                       long position, int depth,
                       std::size_t component_cap = kOracleComponentCap);

// Closed-form expected pressure for full-branch affine systems whose holes
// are unions of whole branch domains:
//   EP(t) = sum_s m(s) log( sum over surviving branches |slope|^{-t} ).
// open_flag = false ignores the holes. Throws NotAnalyticError outside the
// class, DegenerateSystemError when some fiber loses every branch.
double analytic_pressure(const RandomOpenSystem& system, double t, bool open_flag);

struct AnalyticRoot {
  double h = 0.0;
  bool at_lower = false;  // EP(0) <= 0: dimension pinned at 0
  bool at_upper = false;  // EP(1) >= 0: no escape, pinned at 1
  double ep_at_0 = 0.0;
  double ep_at_1 = 0.0;
};

// Unique zero of t -> analytic_pressure(t) in [0, 1], bisected to 1e-12.
AnalyticRoot analytic_root(const RandomOpenSystem& system);

// Least-squares slope of log N(eps) against log(1/eps), one point per
// survivor set with eps its minimal component length. Needs >= 3 usable
// depths.
LinearFit box_count_dimension(const std::vector<IntervalSet>& survivor_sets);

// Conformal masses of the depth-n surviving cylinders of an analytic system:
// weight(Z) / prod of per-fiber surviving weight sums. Exact for these
// systems; masses over all surviving cylinders sum to 1.
std::vector<double> cylinder_conformal_masses(const RandomOpenSystem& system,
                                              const Orbit& orbit, long position,
                                              int depth,
                                              std::vector<Cylinder>* cylinders = nullptr);

// Worst covering time of depth-n cylinders of the closed system: the smallest
// k with T^k(Z) = [0,1] under the most pessimistic admissible continuation of
// the symbol word. -1 when k_cap or the state budget is exhausted.
std::vector<int> covering_time_table(const RandomOpenSystem& system, int depth_max,
                                     int k_cap = 32,
                                     std::size_t state_cap = 100'000);

}  // namespace orim
