#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "agmonkit/error.hpp"

namespace agmonkit {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Uniform tensor grid in one or two dimensions.
///
/// Nodes are enumerated row-major: the flat index of node (i, j) is
/// i * n(1) + j, so the last axis varies fastest.
class Grid {
 public:
  Grid() = default;
  Grid(int dim, std::vector<Interval> bounds, std::vector<std::size_t> n);

  int dim() const { return dim_; }
  std::size_t n(int axis) const { return n_[axis]; }
  double h(int axis) const { return h_[axis]; }
  const Interval& bounds(int axis) const { return bounds_[axis]; }
  std::size_t size() const { return size_; }

  /// Smallest spacing over all axes.
  double h_min() const;
  double h_max() const;
  /// Product of the spacings; the quadrature weight of an interior node.
  double cell_volume() const;

  /// lo + k (hi - lo) / (n - 1), rounded once.
  double coord(int axis, std::size_t k) const {
    const Interval& b = bounds_[axis];
    return b.lo + b.length() * static_cast<double>(k) / static_cast<double>(n_[axis] - 1);
  }
  Point point(std::size_t flat) const;
  std::array<std::size_t, 2> unflatten(std::size_t flat) const;
  std::size_t flatten(std::size_t i, std::size_t j = 0) const { return i * stride0_ + j; }

  /// True if the node lies on the outermost layer of the grid.
  bool on_boundary(std::size_t flat) const;

  /// Node closest to the point p (ties go to the lower index).
  std::size_t nearest_node(const Point& p) const;
  bool contains(const Point& p) const;

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.dim_ == b.dim_ && a.bounds_ == b.bounds_ && a.n_ == b.n_;
  }

 private:
  int dim_ = 0;
  std::vector<Interval> bounds_;
  std::vector<std::size_t> n_;
  std::vector<double> h_;
  std::size_t size_ = 0;
  std::size_t stride0_ = 1;
};

Grid make_grid(int dim, const std::vector<Interval>& bounds, const std::vector<std::size_t>& n);

/// Grid with the same bounds and each spacing halved (n -> 2n - 1).
Grid refine(const Grid& g);

/// Real values sampled on every node of a grid.
class GridField {
 public:
  GridField() = default;
  /// Throws if the length does not match or any value is non-finite.
  GridField(Grid grid, std::vector<double> values);
  /// Indicator field; every value must be exactly 0 or 1.
  static GridField indicator(Grid grid, std::vector<double> values);
  static GridField zeros(const Grid& grid);

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  bool is_indicator() const { return indicator_; }

 private:
  Grid grid_;
  std::vector<double> values_;
  bool indicator_ = false;
};

/// Composite trapezoidal rule over the whole grid.
double integrate(const GridField& f);
/// Trapezoidal weight of every node (product of per-axis weights).
std::vector<double> trapezoid_weights(const Grid& g);

/// |grad f|^2 per node: central differences inside, first-order one-sided
/// differences on the outermost layer.
GridField gradient_sq(const GridField& f);

/// Per-axis partial derivatives with the same stencil as gradient_sq.
std::array<std::vector<double>, 2> gradient(const GridField& f);

/// Standard 3-point (1D) or 5-point (2D) Laplacian at interior nodes, zero on
/// the outermost layer.
std::vector<double> laplacian(const GridField& f);

void require_same_grid(const GridField& a, const GridField& b, const char* what);

}  // namespace agmonkit
