#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lowreg/field.hpp"

namespace lowreg {

/// Exponent, region and measure for an L^p or W^{1,p} norm.
struct NormSpec {
  double p = 2.0;
  std::optional<Box> region;  // whole grid when empty
  int order = 0;              // 0: L^p, 1: W^{1,p}
  const MetricField* reference = nullptr;  // measure sqrt(det g) when set

  static NormSpec lp(double p, std::optional<Box> region = std::nullopt,
                     const MetricField* reference = nullptr) {
    return {p, std::move(region), 0, reference};
  }
  static NormSpec w1p(double p, std::optional<Box> region = std::nullopt,
                      const MetricField* reference = nullptr) {
    return {p, std::move(region), 1, reference};
  }
};

/// p' = p/(p-1); infinity for p = 1.
double conjugate_exponent(double p);
/// r with 1/r = 1/p + 1/q.
double product_exponent(double p, double q);
/// n* = 2n/(n-2), the Sobolev exponent (n >= 3).
double sobolev_exponent(int n);

/// Compensated (Neumaier) accumulator; summation order is the call order.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Midpoint-rule L^p norm over the nodes of spec.region.
double lp_norm(const ScalarField& f, const NormSpec& spec);
double lp_norm(const GridSpec& grid, std::span<const double> values,
               const NormSpec& spec);
/// max |f| over the nodes of region.
double max_norm(const ScalarField& f, std::optional<Box> region = std::nullopt);

/// lp_norm(f) + sum_j lp_norm(d_j f), derivatives by finite differences.
double w1p_norm(const ScalarField& f, const NormSpec& spec);

enum class DerivativeSource { FiniteDifference, Analytic };

/// Second-order central differences inside, second-order one-sided at the
/// boundary layer.
void fd_derivative(const GridSpec& grid, std::span<const double> in, int axis,
                   std::span<double> out);

std::vector<ScalarField> finite_difference_gradient(
    const ScalarField& f, DerivativeSource source = DerivativeSource::FiniteDifference);

/// Contravariant components g^{ij} by the cofactor formula.
SymmetricTensorField metric_inverse(const MetricField& g);

/// Node-wise Frobenius norm |a - b|.
ScalarField frobenius_difference(const SymmetricTensorField& a,
                                 const SymmetricTensorField& b);

/// L^p (order 0) or W^{1,p} (order 1) norm of the tensor a - b, using the
/// Frobenius norm of the tensor and of each of its partial derivatives.
double tensor_difference_norm(const SymmetricTensorField& a,
                              const SymmetricTensorField& b,
                              const NormSpec& spec);

/// sqrt(det g) per node.
std::vector<double> volume_density(const MetricField& g);

}  // namespace lowreg
