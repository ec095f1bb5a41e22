#pragma once

#include <span>
#include <vector>

namespace mlrem {

/// Linearly interpolated quantile (R type 7) of the finite values; NaN when none.
double quantile(std::span<const double> values, double q);
double median(std::span<const double> values);

/// Least-squares slope of log(y) against log(x). Requires >= 2 points, all positive.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace mlrem
