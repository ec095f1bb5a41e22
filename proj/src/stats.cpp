#include "mlrem/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlrem/errors.hpp"

namespace mlrem {

double quantile(std::span<const double> values, double q) {
    std::vector<double> sorted;
    sorted.reserve(values.size());
    for (double v : values) {
        if (std::isfinite(v)) {
            sorted.push_back(v);
        }
    }
    if (sorted.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::sort(sorted.begin(), sorted.end());
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double median(std::span<const double> values) {
    return quantile(values, 0.5);
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw ConfigError("loglog_slope: need at least two paired points");
    }
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
            throw NumericalError("loglog_slope: values must be positive");
        }
        mean_x += std::log(x[i]);
        mean_y += std::log(y[i]);
    }
    mean_x /= static_cast<double>(x.size());
    mean_y /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mean_x;
        sxy += dx * (std::log(y[i]) - mean_y);
        sxx += dx * dx;
    }
    if (sxx == 0.0) {
        throw NumericalError("loglog_slope: x values are all equal");
    }
    return sxy / sxx;
}

}  // namespace mlrem
