#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "orim/driving.hpp"
#include "orim/interval_set.hpp"

namespace orim {

// One monotone branch on [lo, hi). The last branch of a fiber is closed at
// its right endpoint. Affine branches carry exact slope/intercept; generic
// branches carry callable forward and derivative handles and invert by
// bisection. Branch images must stay inside [0, 1] (1e-12 slack, snapped).
class Branch {
 public:
  static Branch affine(double lo, double hi, double slope, double intercept,
                       bool closed_right);
  static Branch generic(double lo, double hi, std::function<double(double)> f,
                        std::function<double(double)> df, bool closed_right);

  bool is_affine() const { return affine_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool closed_right() const { return closed_right_; }
  double slope() const { return slope_; }
  double intercept() const { return intercept_; }
  // Increasing branches: +1, decreasing: -1.
  int orientation() const { return orientation_; }
  double image_lo() const { return image_lo_; }
  double image_hi() const { return image_hi_; }
  // Image equal to [0, 1] within 1e-12.
  bool is_full() const;

  bool contains(double x) const;
  double value(double x) const;           // throws DomainError outside the domain
  // Evaluation on the closed hull [lo, hi]; used where the continuous
  // extension to the open right endpoint is needed.
  double value_closure(double x) const;
  double derivative_abs(double x) const;  // |T'(x)|
  double derivative_abs_closure(double x) const;

  // Preimage of y inside this branch, if any. Generic branches bisect to
  // 1e-14 and verify |T(x) - y| <= 1e-12, else NumericsError.
  std::optional<double> invert(double y) const;
  // Preimage within the closed hull [lo, hi]; use for interval endpoints,
  // where the excluded right endpoint is still a valid interval bound.
  std::optional<double> invert_closure(double y) const;

  IntervalSet domain_set() const { return IntervalSet::single(lo_, hi_); }

 private:
  Branch() = default;
  void finish_validation();

  bool affine_ = true;
  double lo_ = 0.0, hi_ = 1.0;
  bool closed_right_ = false;
  double slope_ = 1.0, intercept_ = 0.0;
  int orientation_ = 1;
  double image_lo_ = 0.0, image_hi_ = 1.0;
  std::function<double(double)> f_, df_;
};

// Piecewise-monotone surjection candidate: branches whose domains partition
// [0, 1] left to right.
class FiberMap {
 public:
  explicit FiberMap(std::vector<Branch> branches);

  const std::vector<Branch>& branches() const { return branches_; }
  int branch_count() const { return static_cast<int>(branches_.size()); }
  int branch_index(double x) const;  // throws DomainError outside [0, 1]
  double apply(double x) const;
  bool all_affine() const;

 private:
  std::vector<Branch> branches_;
};

// Open-system hole: finite union of half-open intervals. The component count
// is the integrability quantity for driving with unbounded branch counts.
class Hole {
 public:
  Hole() = default;
  explicit Hole(IntervalSet set);
  const IntervalSet& set() const { return set_; }
  std::size_t components() const { return set_.components(); }
  bool empty() const { return set_.empty(); }

 private:
  IntervalSet set_;
};

enum class PotentialKind { geometric, tabulated };

// Weight generator g = exp(phi). Geometric potentials use phi = -t log|T'|;
// tabulated potentials carry per-symbol cell values of phi on the operator
// grid and are resolved against it at evaluation time.
class Potential {
 public:
  static Potential geometric(double t);
  static Potential tabulated(std::vector<std::vector<double>> phi_per_symbol);

  PotentialKind kind() const { return kind_; }
  double t() const { return t_; }
  const std::vector<std::vector<double>>& tables() const { return tables_; }

  // Weight at x given |T'(x)|. Tabulated lookups need the cell index of x;
  // callers resolve it through the grid (pass cell < 0 for geometric only).
  double weight(double deriv_abs, int symbol, long cell) const;

 private:
  PotentialKind kind_ = PotentialKind::geometric;
  double t_ = 1.0;
  std::vector<std::vector<double>> tables_;
};

// The full model: driving measure, one fiber map and hole per symbol, and the
// potential. full_branch_guarantee records that every fiber has a full branch
// whose domain misses the hole (checked on construction when set).
class RandomOpenSystem {
 public:
  RandomOpenSystem(DrivingSystem driving, std::vector<FiberMap> fibers,
                   std::vector<Hole> holes, Potential potential,
                   bool full_branch_guarantee);

  const DrivingSystem& driving() const { return driving_; }
  const FiberMap& fiber(int symbol) const { return fibers_.at(symbol); }
  const Hole& hole(int symbol) const { return holes_.at(symbol); }
  int symbols() const { return static_cast<int>(fibers_.size()); }
  const Potential& potential() const { return potential_; }
  bool full_branch_guarantee() const { return full_branch_guarantee_; }

  // Surviving domain I \ H of one fiber.
  IntervalSet surviving_domain(int symbol) const;

  // All fibers affine, every branch full, every hole a union of whole branch
  // domains (1e-12 endpoint slack): the class with closed-form pressure.
  bool analytic() const;

  RandomOpenSystem with_potential(Potential p) const;
  RandomOpenSystem without_holes() const;

 private:
  DrivingSystem driving_;
  std::vector<FiberMap> fibers_;
  std::vector<Hole> holes_;
  Potential potential_;
  bool full_branch_guarantee_ = false;
};

struct WeightedPreimage {
  double x = 0.0;
  double weight = 0.0;  // g_{omega,c}(x)
  int branch = 0;
};

// Preimages of y under one fiber map with their weights. open_flag filters
// out preimages lying in the hole; the surviving list is always a subset of
// the closed list.
std::vector<WeightedPreimage> fiber_preimages(const RandomOpenSystem& system,
                                              int symbol, double y,
                                              bool open_flag);

// Builders. build_beta_system: T(x) = beta x mod 1 with ceil(beta) branches,
// beta >= 1.01. build_affine_ly_system: branch i on [breakpoints[i],
// breakpoints[i+1]) with the given slope, image anchored at 0 (descending
// branches anchor their image top so the image still starts at 0).
RandomOpenSystem build_beta_system(const DrivingSystem& driving,
                                   const std::vector<double>& betas,
                                   const std::vector<IntervalSet>& holes,
                                   const Potential& potential);

RandomOpenSystem build_affine_ly_system(
    const DrivingSystem& driving,
    const std::vector<std::vector<double>>& breakpoints,
    const std::vector<std::vector<double>>& slopes,
    const std::vector<IntervalSet>& holes, const Potential& potential);

}  // namespace orim
