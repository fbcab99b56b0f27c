#include "lowreg/field.hpp"

#include <cmath>
#include <sstream>

#include "lowreg/error.hpp"

namespace lowreg {

void check_finite(std::span<const double> values, const std::string& what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      fail(ErrorKind::Data,
           what + ": non-finite value at node " + std::to_string(i));
    }
  }
}

// --- ScalarField -------------------------------------------------------------

ScalarField::ScalarField(GridSpec grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  require(values_.size() == grid_.size(), ErrorKind::Argument,
          "scalar field size does not match grid");
  check_finite(values_, "scalar field");
}

ScalarField::ScalarField(GridSpec grid, std::vector<double> values,
                         ScalarAnalytic analytic)
    : ScalarField(std::move(grid), std::move(values)) {
  require(static_cast<bool>(analytic.value), ErrorKind::Argument,
          "analytic evaluator without a value function");
  Point x(grid_.dim());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    grid_.position(i, x);
    if (values_[i] != analytic.value(x)) {
      fail(ErrorKind::Data, "sampled values disagree with the analytic form at node " +
                                std::to_string(i));
    }
  }
  analytic_ = std::make_shared<const ScalarAnalytic>(std::move(analytic));
}

ScalarField ScalarField::sample(const GridSpec& grid, ScalarFn value,
                                GradientFn gradient) {
  std::vector<double> v(grid.size());
  Point x(grid.dim());
  for (std::size_t i = 0; i < v.size(); ++i) {
    grid.position(i, x);
    v[i] = value(x);
  }
  ScalarField f(grid, std::move(v));
  f.analytic_ = std::make_shared<const ScalarAnalytic>(
      ScalarAnalytic{std::move(value), std::move(gradient)});
  return f;
}

ScalarField ScalarField::constant(const GridSpec& grid, double c) {
  return sample(
      grid, [c](std::span<const double>) { return c; },
      [](std::span<const double>, std::span<double> g) {
        for (double& v : g) v = 0.0;
      });
}

const ScalarAnalytic& ScalarField::analytic() const {
  require(has_analytic(), ErrorKind::Domain, "field has no analytic evaluator");
  return *analytic_;
}

ScalarField ScalarField::with_constant_padding(double c) const {
  ScalarField f = *this;
  f.pad_constant_ = c;
  return f;
}

double ScalarField::evaluate_off_grid(std::span<const double> x) const {
  if (analytic_) return analytic_->value(x);
  if (pad_constant_ && !grid_.box().contains(x)) return *pad_constant_;
  fail(ErrorKind::Domain,
       "off-grid value requested but the field has no padding");
}

// --- SymmetricTensorField ----------------------------------------------------

SymmetricTensorField::SymmetricTensorField(GridSpec grid)
    : grid_(std::move(grid)),
      packed_(packed_size(grid_.dim()), std::vector<double>(grid_.size(), 0.0)) {
  require(grid_.dim() <= kMaxDim, ErrorKind::Argument,
          "tensor fields support dimension <= " + std::to_string(kMaxDim));
}

SymmetricTensorField::SymmetricTensorField(
    GridSpec grid, std::vector<std::vector<double>> packed)
    : grid_(std::move(grid)), packed_(std::move(packed)) {
  require(grid_.dim() <= kMaxDim, ErrorKind::Argument,
          "tensor fields support dimension <= " + std::to_string(kMaxDim));
  require(packed_.size() == packed_size(grid_.dim()), ErrorKind::Argument,
          "wrong number of packed components");
  for (const auto& c : packed_) {
    require(c.size() == grid_.size(), ErrorKind::Argument,
            "component size does not match grid");
    check_finite(c, "tensor component");
  }
}

bool SymmetricTensorField::component_is_zero(int i, int j) const {
  for (double v : component(i, j)) {
    if (v != 0.0) return false;
  }
  return true;
}

Mat SymmetricTensorField::at(std::size_t node) const {
  const int n = dim();
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = packed_[sym_index(i, j, n)][node];
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

void SymmetricTensorField::set(std::size_t node, const Mat& m) {
  const int n = dim();
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) packed_[sym_index(i, j, n)][node] = m(i, j);
  }
}

// --- MetricField -------------------------------------------------------------

std::string Regularity::describe() const {
  if (is_smooth()) return "smooth";
  std::ostringstream os;
  os << "C0_W1p(" << p << ")";
  return os.str();
}

MetricField::MetricField(SymmetricTensorField components, Regularity regularity,
                         std::optional<MetricAnalytic> analytic)
    : components_(std::move(components)), regularity_(regularity) {
  auto degenerate = [&](std::size_t node) {
    std::ostringstream os;
    os << "metric not positive-definite at node " << node << " (x =";
    for (double c : grid().position(node)) os << ' ' << c;
    os << ")";
    fail(ErrorKind::Degeneracy, os.str());
  };
  const int n = dim();
  if (is_diagonal()) {
    for (int i = 0; i < n; ++i) {
      const auto c = components_.component(i, i);
      for (std::size_t node = 0; node < size(); ++node) {
        if (!(c[node] > 0.0)) degenerate(node);
      }
    }
  } else {
    for (std::size_t node = 0; node < size(); ++node) {
      Eigen::LLT<Mat> llt(components_.at(node));
      if (llt.info() != Eigen::Success) degenerate(node);
    }
  }
  if (analytic) analytic_ = std::make_shared<const MetricAnalytic>(std::move(*analytic));
}

MetricField MetricField::sample(const GridSpec& grid,
                                const MetricAnalytic& analytic,
                                Regularity regularity) {
  SymmetricTensorField comps(grid);
  Point x(grid.dim());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    grid.position(node, x);
    comps.set(node, analytic.value(x));
  }
  return MetricField(std::move(comps), regularity, analytic);
}

MetricField MetricField::euclidean(const GridSpec& grid) {
  const int n = grid.dim();
  MetricAnalytic a;
  a.value = [n](std::span<const double>) -> Mat { return Mat::Identity(n, n); };
  a.derivative = [n](std::span<const double>) {
    MatGrad d;
    for (int k = 0; k < n; ++k) d[k] = Mat::Zero(n, n);
    return d;
  };
  return sample(grid, a, Regularity::smooth());
}

const MetricAnalytic& MetricField::analytic() const {
  require(has_analytic(), ErrorKind::Domain, "metric has no analytic evaluator");
  return *analytic_;
}

Mat MetricField::evaluate_off_grid(std::span<const double> x) const {
  require(has_analytic(), ErrorKind::Domain,
          "off-grid metric value requested but no analytic form is attached");
  double r2 = 0.0;
  for (double c : x) r2 += c * c;
  const bool ok = analytic_->valid_at ? analytic_->valid_at(x)
                                      : std::sqrt(r2) >= analytic_->valid_beyond;
  require(ok, ErrorKind::Domain,
          "analytic metric evaluated inside its invalid region");
  return analytic_->value(x);
}

bool MetricField::is_diagonal() const {
  const int n = dim();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!components_.component_is_zero(i, j)) return false;
    }
  }
  return true;
}

MetricField MetricField::with_regularity(Regularity r) const {
  MetricField m = *this;
  m.regularity_ = r;
  return m;
}

MetricField MetricField::with_analytic(std::optional<MetricAnalytic> a) const {
  MetricField m = *this;
  m.analytic_ = a ? std::make_shared<const MetricAnalytic>(std::move(*a)) : nullptr;
  return m;
}

}  // namespace lowreg
