#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lowreg/grid.hpp"
#include "lowreg/small_matrix.hpp"

namespace lowreg {

using ScalarFn = std::function<double(std::span<const double>)>;
using GradientFn =
    std::function<void(std::span<const double>, std::span<double>)>;

/// Closed-form evaluator attached to a sampled field. Used for off-grid
/// values (convolution padding, sphere quadrature) and exact derivatives.
struct ScalarAnalytic {
  ScalarFn value;
  GradientFn gradient;  // may be empty
};

/// Node-sampled scalar on a grid, optionally carrying its closed form.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(GridSpec grid, std::vector<double> values);
  ScalarField(GridSpec grid, std::vector<double> values,
              ScalarAnalytic analytic);

  static ScalarField sample(const GridSpec& grid, ScalarFn value,
                            GradientFn gradient = {});
  static ScalarField constant(const GridSpec& grid, double c);

  const GridSpec& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t node) const { return values_[node]; }
  std::size_t size() const { return values_.size(); }

  bool has_analytic() const { return analytic_ != nullptr; }
  const ScalarAnalytic& analytic() const;
  /// Declared value outside the box, used when no closed form exists.
  std::optional<double> pad_constant() const { return pad_constant_; }
  ScalarField with_constant_padding(double c) const;
  /// Value at an arbitrary point: analytic form, else padding constant
  /// outside the box. Throws a domain error when neither is available.
  double evaluate_off_grid(std::span<const double> x) const;
  bool has_padding() const { return has_analytic() || pad_constant_.has_value(); }

 private:
  GridSpec grid_;
  std::vector<double> values_;
  std::shared_ptr<const ScalarAnalytic> analytic_;
  std::optional<double> pad_constant_;
};

/// Symmetric n x n tensor per node, stored as n(n+1)/2 packed component
/// arrays so that T_ij == T_ji holds bit-for-bit.
class SymmetricTensorField {
 public:
  SymmetricTensorField() = default;
  explicit SymmetricTensorField(GridSpec grid);
  SymmetricTensorField(GridSpec grid, std::vector<std::vector<double>> packed);

  const GridSpec& grid() const { return grid_; }
  int dim() const { return grid_.dim(); }
  std::size_t size() const { return grid_.size(); }

  std::span<const double> component(int i, int j) const {
    return packed_[sym_index(i, j, dim())];
  }
  std::span<double> component(int i, int j) {
    return packed_[sym_index(i, j, dim())];
  }
  const std::vector<std::vector<double>>& packed() const { return packed_; }
  /// True if component (i, j) is identically zero on the grid.
  bool component_is_zero(int i, int j) const;

  Mat at(std::size_t node) const;
  void set(std::size_t node, const Mat& m);

 private:
  GridSpec grid_;
  std::vector<std::vector<double>> packed_;
};

using MetricFn = std::function<Mat(std::span<const double>)>;
using MetricDerivFn = std::function<MatGrad(std::span<const double>)>;

/// Closed form of a metric. `valid_beyond` bounds where the closed form
/// agrees with the sampled field (|x| >= valid_beyond); `smooth_beyond`
/// bounds where it is smooth.
struct MetricAnalytic {
  MetricFn value;
  MetricDerivFn derivative;  // may be empty
  double valid_beyond = 0.0;
  double smooth_beyond = 0.0;
  /// Finer validity test than the radius bound; empty means "valid wherever
  /// |x| >= valid_beyond".
  std::function<bool(std::span<const double>)> valid_at;
};

enum class RegularityKind { Smooth, C0W1p };

struct Regularity {
  RegularityKind kind = RegularityKind::Smooth;
  double p = 0.0;  // Sobolev exponent for C0W1p

  static Regularity smooth() { return {}; }
  static Regularity rough(double p) { return {RegularityKind::C0W1p, p}; }
  bool is_smooth() const { return kind == RegularityKind::Smooth; }
  std::string describe() const;
};

/// Riemannian metric sampled on a grid. Positive-definite at every node.
class MetricField {
 public:
  MetricField() = default;
  MetricField(SymmetricTensorField components, Regularity regularity,
              std::optional<MetricAnalytic> analytic = std::nullopt);

  static MetricField sample(const GridSpec& grid, const MetricAnalytic& analytic,
                            Regularity regularity);
  static MetricField euclidean(const GridSpec& grid);

  const GridSpec& grid() const { return components_.grid(); }
  int dim() const { return components_.dim(); }
  std::size_t size() const { return components_.size(); }
  const SymmetricTensorField& components() const { return components_; }
  Mat at(std::size_t node) const { return components_.at(node); }
  const Regularity& regularity() const { return regularity_; }

  bool has_analytic() const { return analytic_ != nullptr; }
  const MetricAnalytic& analytic() const;
  /// Closed-form value off the grid (padding); domain error if unavailable
  /// or outside the validity region.
  Mat evaluate_off_grid(std::span<const double> x) const;
  /// True when every off-diagonal component vanishes identically.
  bool is_diagonal() const;

  MetricField with_regularity(Regularity r) const;
  MetricField with_analytic(std::optional<MetricAnalytic> a) const;

 private:
  SymmetricTensorField components_;
  Regularity regularity_;
  std::shared_ptr<const MetricAnalytic> analytic_;
};

/// Throws a data error naming the first non-finite entry.
void check_finite(std::span<const double> values, const std::string& what);

}  // namespace lowreg
