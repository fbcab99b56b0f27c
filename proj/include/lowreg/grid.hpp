#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lowreg {

using Point = std::vector<double>;

/// Closed axis-aligned box [lo, hi] in R^n.
struct Box {
  Point lo;
  Point hi;

  static Box cube(int n, double half_width, double center = 0.0);

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(std::span<const double> x) const;
  bool contains(const Box& other) const;
  /// Euclidean distance from x to the box (0 inside).
  double distance(std::span<const double> x) const;
  /// Largest |x| over the box.
  double circumradius() const;
  /// Box grown by `margin` on every side.
  Box grown(double margin) const;
};

/// Uniform tensor-product grid over a box. Cell-centered grids sample at the
/// centers of N cells per axis; vertex grids sample N points including both
/// faces of the box.
class GridSpec {
 public:
  GridSpec() = default;

  /// Cube [c - L, c + L]^n with spacing h on every axis.
  static GridSpec cube(int n, double half_width, double spacing,
                       bool cell_centered = true, double center = 0.0);
  /// A cell-centered grid with a node exactly at the origin is rejected
  /// unless `allow_origin_node` (solver hierarchies never sample metrics).
  GridSpec(Point center, Point half_width, Point spacing, bool cell_centered,
           bool allow_origin_node = false);

  int dim() const { return n_; }
  const Point& center() const { return center_; }
  const Point& half_width() const { return half_width_; }
  const Point& spacing() const { return spacing_; }
  bool cell_centered() const { return cell_centered_; }

  std::size_t count(int axis) const { return counts_[axis]; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  std::size_t stride(int axis) const { return strides_[axis]; }
  std::size_t size() const { return size_; }
  double cell_volume() const;
  Box box() const;

  double coordinate(int axis, std::size_t i) const {
    return first_[axis] + static_cast<double>(i) * spacing_[axis];
  }
  void position(std::size_t node, std::span<double> x) const;
  Point position(std::size_t node) const;
  void multi_index(std::size_t node, std::span<std::size_t> idx) const;
  std::size_t linear_index(std::span<const std::size_t> idx) const;
  /// True when the node sits in the outermost `layers` layers of the grid.
  bool near_boundary(std::size_t node, std::size_t layers = 1) const;

  /// Same spacing, `layers` extra nodes on every side.
  GridSpec extended(std::size_t layers) const;
  /// Same box center shifted by `offset`.
  GridSpec translated(std::span<const double> offset) const;

  bool same_as(const GridSpec& other) const;
  std::string describe() const;

 private:
  void finalize();

  int n_ = 0;
  Point center_;
  Point half_width_;
  Point spacing_;
  Point first_;
  bool cell_centered_ = true;
  bool allow_origin_node_ = false;
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

/// Indices of grid nodes inside `region`, in increasing linear order.
std::vector<std::size_t> nodes_in(const GridSpec& grid, const Box& region);

}  // namespace lowreg
