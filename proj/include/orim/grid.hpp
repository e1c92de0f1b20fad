#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "orim/interval_set.hpp"
#include "orim/system.hpp"

namespace orim {

// Partition of [0, 1] into cells [x_i, x_{i+1}). Build from a system: the
// uniform n-point ladder refined by every branch endpoint and hole endpoint
// of every fiber. Breakpoints closer than 1e-12 are snapped together; a cell
// narrower than 1e-12 after snapping is a GridError.
class Grid {
 public:
  static std::shared_ptr<const Grid> build(const RandomOpenSystem& system,
                                           std::size_t resolution);
  static std::shared_ptr<const Grid> from_breakpoints(std::vector<double> pts);

  std::size_t cells() const { return widths_.size(); }
  double left(std::size_t i) const { return breakpoints_[i]; }
  double right(std::size_t i) const { return breakpoints_[i + 1]; }
  double width(std::size_t i) const { return widths_[i]; }
  double midpoint(std::size_t i) const {
    return 0.5 * (breakpoints_[i] + breakpoints_[i + 1]);
  }
  double max_width() const { return max_width_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }

  // Cell containing x; x = 1 maps to the last cell. Throws DomainError
  // outside [0, 1].
  std::size_t cell_index(double x) const;

 private:
  explicit Grid(std::vector<double> pts);
  std::vector<double> breakpoints_;
  std::vector<double> widths_;
  double max_width_ = 0.0;
};

using GridPtr = std::shared_ptr<const Grid>;

// Cells where a nonnegative iterate is strictly positive. Masks of the open
// cocycle iterates of 1 are the finite-step supports whose decreasing limit
// carries the surviving dynamics.
struct SupportMask {
  std::vector<std::uint8_t> on;
  std::size_t count = 0;

  bool covers(const SupportMask& other) const;
  bool operator==(const SupportMask& other) const { return on == other.on; }
};

// Piecewise-constant representative: one value per grid cell.
class GridFunction {
 public:
  GridFunction(GridPtr grid, double constant);
  GridFunction(GridPtr grid, std::vector<double> values);

  const GridPtr& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  double value_at(double x) const { return values_[grid_->cell_index(x)]; }
  double sup_abs() const;
  double min() const;
  double max() const;
  // Integral against Lebesgue: sum of value * cell width.
  double integral() const;
  SupportMask support() const;

  GridFunction multiply(const GridFunction& other) const;
  GridFunction scaled(double factor) const;
  // Positive and negative parts, for splitting signed arguments.
  GridFunction positive_part() const;
  GridFunction negative_part() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

// Indicator by cell midpoint membership. Exact when the set's endpoints are
// grid breakpoints.
GridFunction indicator(const GridPtr& grid, const IntervalSet& set);

// Fraction of each cell covered by the set; exact cell-averaged projection of
// the true indicator.
GridFunction coverage(const GridPtr& grid, const IntervalSet& set);

// Total variation of the step function over [0, 1]: sum of |jumps| across
// interior breakpoints.
double variation(const GridFunction& f);

// variation + sup norm.
double bv_norm(const GridFunction& f);

// Hilbert projective (pseudo-)metric on the cone of nonnegative functions,
// restricted to masked cells: log(sup ratio / inf ratio). Returns +infinity
// when exactly one of f, h vanishes on some masked cell. Cells where both
// vanish are ignored; if that happens everywhere the metric is undefined.
double hilbert_metric_plus(const GridFunction& f, const GridFunction& h,
                           const SupportMask& mask);

}  // namespace orim
