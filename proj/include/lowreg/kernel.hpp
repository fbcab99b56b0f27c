#pragma once

#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "lowreg/grid.hpp"

namespace lowreg {

/// Area of the unit (n-1)-sphere in R^n: 2 pi^{n/2} / Gamma(n/2).
double unit_sphere_area(int n);

/// Grid-resolved kernel at one (eps, h): weights on the integer offsets k
/// with |k h| < eps, grouped into rows along axis 0.
struct DiscreteKernel {
  struct Row {
    std::vector<long> offset;  // offsets along axes 1..n-1
    std::vector<double> weight;                 // index k0 + reach[0]
    std::vector<std::vector<double>> gradient;  // per axis, same layout
  };

  int n = 0;
  double eps = 0.0;
  Point spacing;
  std::vector<long> reach;  // max |k_j| per axis
  std::vector<Row> rows;
  /// Quadrature mass of rho_eps before renormalization.
  double raw_mass = 0.0;
  /// Mass after renormalization (1 up to rounding).
  double mass = 0.0;
  std::size_t points = 0;

  long max_reach() const;
};

/// Radial bump rho(x) = c exp(-1/(1-|x|^2)) on |x| < 1, with c fixed so
/// that rho integrates to one; rho_eps(x) = eps^{-n} rho(x/eps).
class MollifierKernel {
 public:
  explicit MollifierKernel(int n);

  int dim() const { return n_; }
  double normalization() const { return c_; }

  double value(std::span<const double> x) const;
  void gradient(std::span<const double> x, std::span<double> out) const;
  double scaled_value(std::span<const double> y, double eps) const;

  /// Discrete kernel at scale eps on spacing h, renormalized so the weights
  /// sum to one and the derivative weights reproduce d_j x_j = 1. Cached.
  /// Resolution error when eps < 2 max(h).
  const DiscreteKernel& discrete(double eps, const Point& h) const;

 private:
  int n_;
  double c_;
  mutable std::map<std::pair<double, Point>, std::shared_ptr<DiscreteKernel>>
      cache_;
};

/// Unnormalized radial profile integral over the unit ball, by composite
/// Gauss-Legendre in r (exposed for testing the normalization).
double bump_ball_integral(int n);

}  // namespace lowreg
