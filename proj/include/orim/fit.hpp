#pragma once

#include <vector>

namespace orim {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

// Ordinary least squares y ~ slope * x + intercept. Throws
// InsufficientDataError with fewer than two points. r2 is reported as 1 when
// the y-values are constant (zero total variance).
LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace orim
