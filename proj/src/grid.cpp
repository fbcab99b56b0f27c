#include "lowreg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lowreg/error.hpp"

namespace lowreg {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Data: return "data";
    case ErrorKind::Degeneracy: return "degeneracy";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::Contract: return "contract";
    case ErrorKind::Fit: return "fit";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::MaximumPrinciple: return "maximum-principle";
    case ErrorKind::Argument: return "argument";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Box Box::cube(int n, double half_width, double center) {
  return Box{Point(n, center - half_width), Point(n, center + half_width)};
}

bool Box::contains(std::span<const double> x) const {
  for (std::size_t k = 0; k < lo.size(); ++k) {
    if (x[k] < lo[k] || x[k] > hi[k]) return false;
  }
  return true;
}

bool Box::contains(const Box& other) const {
  for (std::size_t k = 0; k < lo.size(); ++k) {
    if (other.lo[k] < lo[k] || other.hi[k] > hi[k]) return false;
  }
  return true;
}

double Box::distance(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    const double d = std::max({lo[k] - x[k], 0.0, x[k] - hi[k]});
    s += d * d;
  }
  return std::sqrt(s);
}

double Box::circumradius() const {
  double s = 0.0;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    const double d = std::max(std::abs(lo[k]), std::abs(hi[k]));
    s += d * d;
  }
  return std::sqrt(s);
}

Box Box::grown(double margin) const {
  Box b = *this;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    b.lo[k] -= margin;
    b.hi[k] += margin;
  }
  return b;
}

GridSpec GridSpec::cube(int n, double half_width, double spacing,
                        bool cell_centered, double center) {
  return GridSpec(Point(n, center), Point(n, half_width), Point(n, spacing),
                  cell_centered);
}

GridSpec::GridSpec(Point center, Point half_width, Point spacing,
                   bool cell_centered, bool allow_origin_node)
    : n_(static_cast<int>(center.size())),
      center_(std::move(center)),
      half_width_(std::move(half_width)),
      spacing_(std::move(spacing)),
      cell_centered_(cell_centered),
      allow_origin_node_(allow_origin_node) {
  finalize();
}

void GridSpec::finalize() {
  require(n_ >= 1, ErrorKind::Argument, "grid dimension must be >= 1");
  require(half_width_.size() == static_cast<std::size_t>(n_) &&
              spacing_.size() == static_cast<std::size_t>(n_),
          ErrorKind::Argument, "grid extent/spacing dimension mismatch");
  counts_.assign(n_, 0);
  strides_.assign(n_, 0);
  first_.assign(n_, 0.0);
  size_ = 1;
  for (int k = 0; k < n_; ++k) {
    const double h = spacing_[k];
    const double L = half_width_[k];
    require(h > 0.0 && std::isfinite(h), ErrorKind::Argument,
            "grid spacing must be positive");
    require(L > 0.0 && std::isfinite(L), ErrorKind::Argument,
            "grid half-width must be positive");
    const double cells = 2.0 * L / h;
    const double rounded = std::round(cells);
    require(std::abs(cells - rounded) <= 1e-9 * std::max(1.0, cells),
            ErrorKind::Argument,
            "box width must be an integer multiple of the spacing");
    const auto ncells = static_cast<std::size_t>(rounded);
    counts_[k] = cell_centered_ ? ncells : ncells + 1;
    require(counts_[k] >= 3, ErrorKind::Argument,
            "grid needs at least 3 nodes per axis");
    first_[k] = center_[k] - L + (cell_centered_ ? 0.5 * h : 0.0);
    strides_[k] = size_;
    size_ *= counts_[k];
  }
  if (cell_centered_ && !allow_origin_node_) {
    // A node at the coordinate origin would sit on corpus point singularities.
    bool all_hit = true;
    for (int k = 0; k < n_ && all_hit; ++k) {
      const double t = -first_[k] / spacing_[k];
      const double r = std::round(t);
      all_hit = std::abs(t - r) < 1e-9 && r >= 0.0 &&
                r <= static_cast<double>(counts_[k] - 1);
    }
    require(!all_hit, ErrorKind::Argument,
            "cell-centered grid places a node at the origin");
  }
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (double h : spacing_) v *= h;
  return v;
}

Box GridSpec::box() const {
  Box b{Point(n_), Point(n_)};
  for (int k = 0; k < n_; ++k) {
    b.lo[k] = center_[k] - half_width_[k];
    b.hi[k] = center_[k] + half_width_[k];
  }
  return b;
}

void GridSpec::position(std::size_t node, std::span<double> x) const {
  for (int k = 0; k < n_; ++k) {
    const std::size_t i = (node / strides_[k]) % counts_[k];
    x[k] = coordinate(k, i);
  }
}

Point GridSpec::position(std::size_t node) const {
  Point x(n_);
  position(node, x);
  return x;
}

void GridSpec::multi_index(std::size_t node,
                           std::span<std::size_t> idx) const {
  for (int k = 0; k < n_; ++k) idx[k] = (node / strides_[k]) % counts_[k];
}

std::size_t GridSpec::linear_index(std::span<const std::size_t> idx) const {
  std::size_t node = 0;
  for (int k = 0; k < n_; ++k) node += idx[k] * strides_[k];
  return node;
}

bool GridSpec::near_boundary(std::size_t node, std::size_t layers) const {
  for (int k = 0; k < n_; ++k) {
    const std::size_t i = (node / strides_[k]) % counts_[k];
    if (i < layers || i + layers >= counts_[k]) return true;
  }
  return false;
}

GridSpec GridSpec::extended(std::size_t layers) const {
  Point hw = half_width_;
  for (int k = 0; k < n_; ++k) {
    hw[k] += static_cast<double>(layers) * spacing_[k];
  }
  return GridSpec(center_, hw, spacing_, cell_centered_);
}

GridSpec GridSpec::translated(std::span<const double> offset) const {
  Point c = center_;
  for (int k = 0; k < n_; ++k) c[k] += offset[k];
  return GridSpec(c, half_width_, spacing_, cell_centered_);
}

bool GridSpec::same_as(const GridSpec& other) const {
  if (n_ != other.n_ || cell_centered_ != other.cell_centered_) return false;
  for (int k = 0; k < n_; ++k) {
    if (counts_[k] != other.counts_[k]) return false;
    if (std::abs(first_[k] - other.first_[k]) > 1e-12 * (1.0 + std::abs(first_[k])))
      return false;
    if (std::abs(spacing_[k] - other.spacing_[k]) > 1e-14 * spacing_[k])
      return false;
  }
  return true;
}

std::string GridSpec::describe() const {
  std::ostringstream os;
  os << "grid n=" << n_ << " nodes=";
  for (int k = 0; k < n_; ++k) os << (k ? "x" : "") << counts_[k];
  os << " h=" << spacing_[0] << (cell_centered_ ? " cell" : " vertex");
  return os.str();
}

std::vector<std::size_t> nodes_in(const GridSpec& grid, const Box& region) {
  const int n = grid.dim();
  require(region.dim() == n, ErrorKind::Argument, "region dimension mismatch");
  std::vector<std::size_t> lo(n), hi(n);
  for (int k = 0; k < n; ++k) {
    const double h = grid.spacing()[k];
    const double first = grid.coordinate(k, 0);
    const double tol = 1e-9 * h;
    const double a = std::ceil((region.lo[k] - first - tol) / h);
    const double b = std::floor((region.hi[k] - first + tol) / h);
    const double last = static_cast<double>(grid.count(k) - 1);
    if (b < 0.0 || a > last || a > b) return {};
    lo[k] = static_cast<std::size_t>(std::max(a, 0.0));
    hi[k] = static_cast<std::size_t>(std::min(b, last));
  }
  std::vector<std::size_t> out;
  std::vector<std::size_t> idx = lo;
  while (true) {
    out.push_back(grid.linear_index(idx));
    int k = 0;
    for (; k < n; ++k) {
      if (idx[k] < hi[k]) {
        ++idx[k];
        break;
      }
      idx[k] = lo[k];
    }
    if (k == n) break;
  }
  return out;
}

}  // namespace lowreg
