#include "lowreg/rate_fit.hpp"

#include <cmath>
#include <limits>

#include "lowreg/error.hpp"

namespace lowreg {

double RateFit::constant() const { return std::exp(intercept); }

RateFit fit_loglog(std::span<const double> eps, std::span<const double> values) {
  require(eps.size() == values.size(), ErrorKind::Argument,
          "rate fit: eps and values differ in length");
  require(eps.size() >= 3, ErrorKind::Fit, "rate fit needs at least 3 scales");
  RateFit fit;
  fit.eps.assign(eps.begin(), eps.end());
  fit.values.assign(values.begin(), values.end());
  for (double v : values) {
    if (!(v > 0.0)) {
      fit.degenerate = true;
      fit.slope = fit.intercept = std::numeric_limits<double>::quiet_NaN();
      return fit;
    }
  }
  const auto m = static_cast<double>(eps.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double x = std::log(eps[i]);
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  require(denom > 0.0, ErrorKind::Fit, "rate fit: scales are not distinct");
  fit.slope = (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / m;
  double ss = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double r =
        std::log(values[i]) - (fit.intercept + fit.slope * std::log(eps[i]));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / m);
  return fit;
}

bool strictly_decreasing(std::span<const double> values) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] < values[i - 1])) return false;
  }
  return true;
}

bool ratios_below_one(std::span<const double> values) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i - 1] > 0.0) || !(values[i] / values[i - 1] < 1.0)) return false;
  }
  return true;
}

}  // namespace lowreg
