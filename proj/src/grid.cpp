#include "orim/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "orim/errors.hpp"

namespace orim {

namespace {
constexpr double kSnapTol = 1e-12;
constexpr double kMinWidth = 1e-12;
}  // namespace

Grid::Grid(std::vector<double> pts) : breakpoints_(std::move(pts)) {
  if (breakpoints_.size() < 2) throw GridError("Grid: need at least one cell");
  widths_.resize(breakpoints_.size() - 1);
  for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
    widths_[i] = breakpoints_[i + 1] - breakpoints_[i];
    if (widths_[i] < kMinWidth) {
      throw GridError("Grid: cell below minimum width at breakpoint " +
                      std::to_string(breakpoints_[i]));
    }
    max_width_ = std::max(max_width_, widths_[i]);
  }
}

std::shared_ptr<const Grid> Grid::from_breakpoints(std::vector<double> pts) {
  std::sort(pts.begin(), pts.end());
  std::vector<double> snapped;
  for (double x : pts) {
    if (x < -kSnapTol || x > 1.0 + kSnapTol) {
      throw GridError("Grid: breakpoint outside [0, 1]");
    }
    x = std::clamp(x, 0.0, 1.0);
    if (snapped.empty() || x - snapped.back() > kSnapTol) {
      snapped.push_back(x);
    }
  }
  if (snapped.empty() || snapped.front() > kSnapTol) {
    snapped.insert(snapped.begin(), 0.0);
  }
  snapped.front() = 0.0;
  if (1.0 - snapped.back() > kSnapTol) {
    snapped.push_back(1.0);
  }
  snapped.back() = 1.0;
  return std::shared_ptr<const Grid>(new Grid(std::move(snapped)));
}

std::shared_ptr<const Grid> Grid::build(const RandomOpenSystem& system,
                                        std::size_t resolution) {
  if (resolution < 1) throw GridError("Grid: resolution must be positive");
  std::vector<double> pts;
  pts.reserve(resolution + 1);
  for (std::size_t i = 0; i <= resolution; ++i) {
    pts.push_back(static_cast<double>(i) / static_cast<double>(resolution));
  }
  for (int s = 0; s < system.symbols(); ++s) {
    for (const auto& b : system.fiber(s).branches()) {
      pts.push_back(b.lo());
      pts.push_back(b.hi());
    }
    for (const auto& part : system.hole(s).set().parts()) {
      pts.push_back(part.a);
      pts.push_back(part.b);
    }
  }
  return from_breakpoints(std::move(pts));
}

std::size_t Grid::cell_index(double x) const {
  if (x < 0.0 || x > 1.0) throw DomainError("Grid: point outside [0, 1]");
  if (x >= breakpoints_[breakpoints_.size() - 2]) return cells() - 1;
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  return static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
}

bool SupportMask::covers(const SupportMask& other) const {
  if (on.size() != other.on.size()) return false;
  for (std::size_t i = 0; i < on.size(); ++i) {
    if (other.on[i] && !on[i]) return false;
  }
  return true;
}

GridFunction::GridFunction(GridPtr grid, double constant)
    : grid_(std::move(grid)), values_(grid_->cells(), constant) {}

GridFunction::GridFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->cells()) {
    throw GridError("GridFunction: value count does not match the grid");
  }
}

double GridFunction::sup_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::fabs(v));
  return m;
}

double GridFunction::min() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : values_) m = std::min(m, v);
  return m;
}

double GridFunction::max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values_) m = std::max(m, v);
  return m;
}

double GridFunction::integral() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    sum += values_[i] * grid_->width(i);
  }
  return sum;
}

SupportMask GridFunction::support() const {
  SupportMask mask;
  mask.on.resize(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    mask.on[i] = values_[i] > 0.0 ? 1 : 0;
    mask.count += mask.on[i];
  }
  return mask;
}

GridFunction GridFunction::multiply(const GridFunction& other) const {
  GridFunction out(grid_, values_);
  for (std::size_t i = 0; i < values_.size(); ++i) out[i] *= other[i];
  return out;
}

GridFunction GridFunction::scaled(double factor) const {
  GridFunction out(grid_, values_);
  for (auto& v : out.values()) v *= factor;
  return out;
}

GridFunction GridFunction::positive_part() const {
  GridFunction out(grid_, values_);
  for (auto& v : out.values()) v = std::max(v, 0.0);
  return out;
}

GridFunction GridFunction::negative_part() const {
  GridFunction out(grid_, values_);
  for (auto& v : out.values()) v = std::max(-v, 0.0);
  return out;
}

GridFunction indicator(const GridPtr& grid, const IntervalSet& set) {
  GridFunction out(grid, 0.0);
  for (std::size_t i = 0; i < grid->cells(); ++i) {
    out[i] = set.contains(grid->midpoint(i)) ? 1.0 : 0.0;
  }
  return out;
}

GridFunction coverage(const GridPtr& grid, const IntervalSet& set) {
  GridFunction out(grid, 0.0);
  for (std::size_t i = 0; i < grid->cells(); ++i) {
    out[i] = set.overlap_length(grid->left(i), grid->right(i)) / grid->width(i);
  }
  return out;
}

double variation(const GridFunction& f) {
  double var = 0.0;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) {
    var += std::fabs(f[i + 1] - f[i]);
  }
  return var;
}

double bv_norm(const GridFunction& f) { return variation(f) + f.sup_abs(); }

double hilbert_metric_plus(const GridFunction& f, const GridFunction& h,
                           const SupportMask& mask) {
  if (mask.on.size() != f.size() || f.size() != h.size()) {
    throw GridError("hilbert_metric_plus: size mismatch");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  bool any = false;
  bool unbounded = false;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!mask.on[i]) continue;
    double a = f[i], b = h[i];
    if (a < 0.0 || b < 0.0) {
      throw DomainError("hilbert_metric_plus: cone requires nonnegative values");
    }
    if (a == 0.0 && b == 0.0) continue;
    any = true;
    if (a == 0.0 || b == 0.0) {
      unbounded = true;
      continue;
    }
    double r = a / b;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  if (!any) {
    throw UndefinedMetric("hilbert_metric_plus: both functions vanish on the mask");
  }
  if (unbounded) return std::numeric_limits<double>::infinity();
  return std::log(hi / lo);
}

}  // namespace orim
