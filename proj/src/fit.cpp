#include "orim/fit.hpp"

#include <cmath>

#include "orim/errors.hpp"

namespace orim {

LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) {
    throw InsufficientDataError("linear_fit: coordinate lists differ in length");
  }
  const std::size_t n = xs.size();
  if (n < 2) throw InsufficientDataError("linear_fit: need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw InsufficientDataError("linear_fit: degenerate abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points = n;
  if (syy == 0.0) {
    fit.r2 = 1.0;
  } else {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
      ss_res += r * r;
    }
    fit.r2 = 1.0 - ss_res / syy;
  }
  return fit;
}

}  // namespace orim
