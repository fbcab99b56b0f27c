#pragma once

#include <span>
#include <vector>

namespace lowreg {

/// Least-squares fit of log(value) = intercept + slope * log(eps).
struct RateFit {
  std::vector<double> eps;
  std::vector<double> values;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS of the log-residuals
  bool degenerate = false;  // some value <= 0; slope/intercept are NaN

  double constant() const;  // exp(intercept)
};

/// Requires >= 3 scales (fit error otherwise).
RateFit fit_loglog(std::span<const double> eps, std::span<const double> values);

bool strictly_decreasing(std::span<const double> values);
/// Every successive ratio values[i+1]/values[i] < 1.
bool ratios_below_one(std::span<const double> values);

}  // namespace lowreg
