#include "orim/system.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "orim/errors.hpp"

namespace orim {

namespace {

constexpr double kEndpointSlack = 1e-12;
constexpr double kBisectTol = 1e-14;
constexpr double kInverseCheckTol = 1e-12;

}  // namespace

Branch Branch::affine(double lo, double hi, double slope, double intercept,
                      bool closed_right) {
  if (!(lo < hi)) throw DomainError("Branch: requires lo < hi");
  if (slope == 0.0 || !std::isfinite(slope)) {
    throw DomainError("Branch: affine slope must be nonzero and finite");
  }
  Branch b;
  b.affine_ = true;
  b.lo_ = lo;
  b.hi_ = hi;
  b.closed_right_ = closed_right;
  b.slope_ = slope;
  b.intercept_ = intercept;
  b.orientation_ = slope > 0.0 ? 1 : -1;
  double u = slope * lo + intercept;
  double v = slope * hi + intercept;
  b.image_lo_ = std::min(u, v);
  b.image_hi_ = std::max(u, v);
  b.finish_validation();
  return b;
}

Branch Branch::generic(double lo, double hi, std::function<double(double)> f,
                       std::function<double(double)> df, bool closed_right) {
  if (!(lo < hi)) throw DomainError("Branch: requires lo < hi");
  if (!f || !df) throw DomainError("Branch: generic handles must be callable");
  Branch b;
  b.affine_ = false;
  b.lo_ = lo;
  b.hi_ = hi;
  b.closed_right_ = closed_right;
  b.f_ = std::move(f);
  b.df_ = std::move(df);
  double d_lo = b.df_(lo), d_mid = b.df_(0.5 * (lo + hi)), d_hi = b.df_(hi);
  if (d_lo == 0.0 || d_mid == 0.0 || d_hi == 0.0 ||
      (d_lo > 0) != (d_mid > 0) || (d_mid > 0) != (d_hi > 0)) {
    throw DomainError("Branch: derivative must keep one sign on the domain");
  }
  b.orientation_ = d_mid > 0.0 ? 1 : -1;
  double u = b.f_(lo);
  double v = b.f_(hi);
  b.image_lo_ = std::min(u, v);
  b.image_hi_ = std::max(u, v);
  b.finish_validation();
  return b;
}

void Branch::finish_validation() {
  if (image_lo_ < -kEndpointSlack || image_hi_ > 1.0 + kEndpointSlack) {
    throw DomainError("Branch: image escapes [0, 1]");
  }
  image_lo_ = std::max(image_lo_, 0.0);
  image_hi_ = std::min(image_hi_, 1.0);
}

bool Branch::is_full() const {
  return image_lo_ <= kEndpointSlack && image_hi_ >= 1.0 - kEndpointSlack;
}

bool Branch::contains(double x) const {
  if (x < lo_) return false;
  return closed_right_ ? x <= hi_ : x < hi_;
}

double Branch::value(double x) const {
  if (!contains(x)) throw DomainError("Branch::value: point outside domain");
  return affine_ ? slope_ * x + intercept_ : f_(x);
}

double Branch::value_closure(double x) const {
  if (x < lo_ - kEndpointSlack || x > hi_ + kEndpointSlack) {
    throw DomainError("Branch::value_closure: point outside closed domain");
  }
  return affine_ ? slope_ * x + intercept_ : f_(x);
}

double Branch::derivative_abs(double x) const {
  if (!contains(x)) throw DomainError("Branch::derivative_abs: point outside domain");
  return affine_ ? std::fabs(slope_) : std::fabs(df_(x));
}

double Branch::derivative_abs_closure(double x) const {
  if (x < lo_ - kEndpointSlack || x > hi_ + kEndpointSlack) {
    throw DomainError("Branch::derivative_abs_closure: point outside closed domain");
  }
  return affine_ ? std::fabs(slope_) : std::fabs(df_(x));
}

std::optional<double> Branch::invert(double y) const {
  if (y < image_lo_ - kEndpointSlack || y > image_hi_ + kEndpointSlack) {
    return std::nullopt;
  }
  double x;
  if (affine_) {
    x = (y - intercept_) / slope_;
  } else {
    // Bisection on the monotone forward map.
    double a = lo_, fa = f_(a);
    double b = hi_, fb = f_(b);
    if (orientation_ < 0) {
      std::swap(a, b);
      std::swap(fa, fb);
    }
    // Now f(a) <= f(b) along the search direction.
    if (y <= fa) {
      x = a;
    } else if (y >= fb) {
      x = b;
    } else {
      for (int it = 0; it < 200 && std::fabs(b - a) > kBisectTol; ++it) {
        double m = 0.5 * (a + b);
        if (f_(m) < y) {
          a = m;
        } else {
          b = m;
        }
      }
      x = 0.5 * (a + b);
    }
    if (std::fabs(f_(x) - y) > kInverseCheckTol) {
      throw NumericsError("Branch::invert: bisection failed to meet tolerance");
    }
  }
  // Round-off can push a boundary preimage one ulp outside the domain.
  if (x < lo_ && x > lo_ - kEndpointSlack) x = lo_;
  if (x > hi_ && x < hi_ + kEndpointSlack) x = hi_;
  if (!contains(x)) return std::nullopt;
  return x;
}

std::optional<double> Branch::invert_closure(double y) const {
  auto x = invert(y);
  if (x) return x;
  if (y < image_lo_ - kEndpointSlack || y > image_hi_ + kEndpointSlack) {
    return std::nullopt;
  }
  // invert() rejected a point that lies in the image closure: it must be the
  // excluded right endpoint of the domain (or its own round-off twin).
  const double top =
      orientation_ > 0 ? image_hi_ : image_lo_;  // image of x = hi
  if (std::fabs(y - top) <= kEndpointSlack) return hi_;
  return lo_;
}

FiberMap::FiberMap(std::vector<Branch> branches) : branches_(std::move(branches)) {
  if (branches_.empty()) throw DomainError("FiberMap: no branches");
  if (std::fabs(branches_.front().lo()) > kEndpointSlack) {
    throw DomainError("FiberMap: first branch must start at 0");
  }
  if (std::fabs(branches_.back().hi() - 1.0) > kEndpointSlack) {
    throw DomainError("FiberMap: last branch must end at 1");
  }
  for (std::size_t i = 0; i + 1 < branches_.size(); ++i) {
    if (std::fabs(branches_[i].hi() - branches_[i + 1].lo()) > kEndpointSlack) {
      throw DomainError("FiberMap: branch domains must abut");
    }
    if (branches_[i].closed_right()) {
      throw DomainError("FiberMap: only the last branch is closed on the right");
    }
  }
  if (!branches_.back().closed_right()) {
    throw DomainError("FiberMap: last branch must be closed at its right endpoint");
  }
}

int FiberMap::branch_index(double x) const {
  if (x < 0.0 || x > 1.0) throw DomainError("FiberMap: point outside [0, 1]");
  auto it = std::upper_bound(
      branches_.begin(), branches_.end(), x,
      [](double v, const Branch& b) { return v < b.lo(); });
  auto idx = static_cast<int>(it - branches_.begin()) - 1;
  if (idx < 0) idx = 0;
  if (!branches_[idx].contains(x) && idx + 1 < branch_count() &&
      branches_[idx + 1].contains(x)) {
    ++idx;
  }
  return idx;
}

double FiberMap::apply(double x) const { return branches_[branch_index(x)].value(x); }

bool FiberMap::all_affine() const {
  return std::all_of(branches_.begin(), branches_.end(),
                     [](const Branch& b) { return b.is_affine(); });
}

Hole::Hole(IntervalSet set) : set_(set.intersect(IntervalSet::full())) {}

Potential Potential::geometric(double t) {
  if (!std::isfinite(t)) throw ConfigError("Potential: t must be finite");
  Potential p;
  p.kind_ = PotentialKind::geometric;
  p.t_ = t;
  return p;
}

Potential Potential::tabulated(std::vector<std::vector<double>> phi_per_symbol) {
  if (phi_per_symbol.empty()) {
    throw ConfigError("Potential: tabulated form needs at least one symbol table");
  }
  Potential p;
  p.kind_ = PotentialKind::tabulated;
  p.tables_ = std::move(phi_per_symbol);
  return p;
}

double Potential::weight(double deriv_abs, int symbol, long cell) const {
  if (kind_ == PotentialKind::geometric) {
    return std::pow(deriv_abs, -t_);
  }
  if (cell < 0) {
    throw ConfigError("Potential: tabulated weight needs a grid cell index");
  }
  const auto& table = tables_.at(symbol);
  if (cell >= static_cast<long>(table.size())) {
    throw ConfigError("Potential: tabulated values do not match the grid");
  }
  return std::exp(table[static_cast<std::size_t>(cell)]);
}

RandomOpenSystem::RandomOpenSystem(DrivingSystem driving,
                                   std::vector<FiberMap> fibers,
                                   std::vector<Hole> holes, Potential potential,
                                   bool full_branch_guarantee)
    : driving_(std::move(driving)),
      fibers_(std::move(fibers)),
      holes_(std::move(holes)),
      potential_(std::move(potential)),
      full_branch_guarantee_(full_branch_guarantee) {
  if (fibers_.size() != static_cast<std::size_t>(driving_.symbols()) ||
      holes_.size() != fibers_.size()) {
    throw ConfigError("RandomOpenSystem: one fiber map and hole per symbol required");
  }
  if (potential_.kind() == PotentialKind::tabulated &&
      potential_.tables().size() != fibers_.size()) {
    throw ConfigError("RandomOpenSystem: tabulated potential needs one table per symbol");
  }
  if (full_branch_guarantee_) {
    for (int s = 0; s < symbols(); ++s) {
      bool found = false;
      for (const auto& b : fibers_[s].branches()) {
        if (b.is_full() &&
            holes_[s].set().overlap_length(b.lo(), b.hi()) <= kEndpointSlack) {
          found = true;
          break;
        }
      }
      if (!found) {
        throw ConfigError(
            "RandomOpenSystem: full_branch_guarantee set but fiber " +
            std::to_string(s) + " has no full branch outside its hole");
      }
    }
  }
}

IntervalSet RandomOpenSystem::surviving_domain(int symbol) const {
  return hole(symbol).set().complement();
}

bool RandomOpenSystem::analytic() const {
  if (potential_.kind() != PotentialKind::geometric) return false;
  for (int s = 0; s < symbols(); ++s) {
    const auto& branches = fibers_[s].branches();
    for (const auto& b : branches) {
      if (!b.is_affine() || !b.is_full()) return false;
    }
    for (const auto& part : holes_[s].set().parts()) {
      bool left_ok = false, right_ok = false;
      for (const auto& b : branches) {
        if (std::fabs(part.a - b.lo()) <= kEndpointSlack) left_ok = true;
        if (std::fabs(part.b - b.hi()) <= kEndpointSlack) right_ok = true;
      }
      if (!left_ok || !right_ok) return false;
    }
  }
  return true;
}

RandomOpenSystem RandomOpenSystem::with_potential(Potential p) const {
  return RandomOpenSystem(driving_, fibers_, holes_, std::move(p),
                          full_branch_guarantee_);
}

RandomOpenSystem RandomOpenSystem::without_holes() const {
  std::vector<Hole> empty(holes_.size());
  bool guarantee = true;
  for (const auto& f : fibers_) {
    guarantee = guarantee &&
                std::any_of(f.branches().begin(), f.branches().end(),
                            [](const Branch& b) { return b.is_full(); });
  }
  return RandomOpenSystem(driving_, fibers_, std::move(empty), potential_, guarantee);
}

std::vector<WeightedPreimage> fiber_preimages(const RandomOpenSystem& system,
                                              int symbol, double y,
                                              bool open_flag) {
  if (system.potential().kind() == PotentialKind::tabulated) {
    throw ConfigError(
        "fiber_preimages: tabulated potentials are resolved through the grid; "
        "use the operator-level preimage evaluation");
  }
  std::vector<WeightedPreimage> out;
  const FiberMap& fiber = system.fiber(symbol);
  const Hole& hole = system.hole(symbol);
  for (int bi = 0; bi < fiber.branch_count(); ++bi) {
    const Branch& b = fiber.branches()[bi];
    auto x = b.invert(y);
    if (!x) continue;
    if (open_flag && hole.set().contains(*x)) continue;
    out.push_back({*x, system.potential().weight(b.derivative_abs(*x), symbol, -1), bi});
  }
  return out;
}

RandomOpenSystem build_beta_system(const DrivingSystem& driving,
                                   const std::vector<double>& betas,
                                   const std::vector<IntervalSet>& holes,
                                   const Potential& potential) {
  if (betas.size() != static_cast<std::size_t>(driving.symbols()) ||
      holes.size() != betas.size()) {
    throw ConfigError("build_beta_system: need one beta and one hole per symbol");
  }
  std::vector<FiberMap> fibers;
  std::vector<Hole> hole_objs;
  for (std::size_t s = 0; s < betas.size(); ++s) {
    double beta = betas[s];
    if (!(beta >= 1.01)) {
      throw ConfigError("build_beta_system: beta must be >= 1.01");
    }
    int n_branch = static_cast<int>(std::ceil(beta - kEndpointSlack));
    std::vector<Branch> branches;
    branches.reserve(n_branch);
    for (int k = 0; k < n_branch; ++k) {
      double lo = static_cast<double>(k) / beta;
      bool last = k == n_branch - 1;
      double hi = last ? 1.0 : static_cast<double>(k + 1) / beta;
      branches.push_back(Branch::affine(lo, hi, beta, -static_cast<double>(k), last));
    }
    fibers.emplace_back(std::move(branches));
    hole_objs.emplace_back(holes[s]);
  }
  bool guarantee = true;
  for (std::size_t s = 0; s < fibers.size(); ++s) {
    bool found = false;
    for (const auto& b : fibers[s].branches()) {
      if (b.is_full() &&
          hole_objs[s].set().overlap_length(b.lo(), b.hi()) <= kEndpointSlack) {
        found = true;
      }
    }
    guarantee = guarantee && found;
  }
  return RandomOpenSystem(driving, std::move(fibers), std::move(hole_objs),
                          potential, guarantee);
}

RandomOpenSystem build_affine_ly_system(
    const DrivingSystem& driving,
    const std::vector<std::vector<double>>& breakpoints,
    const std::vector<std::vector<double>>& slopes,
    const std::vector<IntervalSet>& holes, const Potential& potential) {
  if (breakpoints.size() != static_cast<std::size_t>(driving.symbols()) ||
      slopes.size() != breakpoints.size() || holes.size() != breakpoints.size()) {
    throw ConfigError(
        "build_affine_ly_system: need breakpoints, slopes and hole per symbol");
  }
  std::vector<FiberMap> fibers;
  std::vector<Hole> hole_objs;
  for (std::size_t s = 0; s < breakpoints.size(); ++s) {
    const auto& bp = breakpoints[s];
    const auto& sl = slopes[s];
    if (bp.size() < 2 || sl.size() + 1 != bp.size()) {
      throw ConfigError("build_affine_ly_system: slopes must pair consecutive breakpoints");
    }
    std::vector<Branch> branches;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
      if (!(bp[i] < bp[i + 1])) {
        throw ConfigError("build_affine_ly_system: breakpoints must increase");
      }
      bool last = i + 2 == bp.size();
      double slope = sl[i];
      // Image anchored so that it starts at 0 for either orientation.
      double intercept = slope > 0.0 ? -slope * bp[i] : -slope * bp[i + 1];
      branches.push_back(Branch::affine(bp[i], bp[i + 1], slope, intercept, last));
    }
    fibers.emplace_back(std::move(branches));
    hole_objs.emplace_back(holes[s]);
  }
  bool guarantee = true;
  for (std::size_t s = 0; s < fibers.size(); ++s) {
    bool found = false;
    for (const auto& b : fibers[s].branches()) {
      if (b.is_full() &&
          hole_objs[s].set().overlap_length(b.lo(), b.hi()) <= kEndpointSlack) {
        found = true;
      }
    }
    guarantee = guarantee && found;
  }
  return RandomOpenSystem(driving, std::move(fibers), std::move(hole_objs),
                          potential, guarantee);
}

}  // namespace orim
