#include "agmonkit/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "agmonkit/simd.hpp"

namespace agmonkit {

Grid::Grid(int dim, std::vector<Interval> bounds, std::vector<std::size_t> n)
    : dim_(dim), bounds_(std::move(bounds)), n_(std::move(n)) {
  if (dim_ != 1 && dim_ != 2) {
    throw InvalidArgument("grid dimension must be 1 or 2, got " + std::to_string(dim_));
  }
  if (bounds_.size() != static_cast<std::size_t>(dim_) || n_.size() != bounds_.size()) {
    throw InvalidArgument("grid needs one interval and one point count per axis");
  }
  size_ = 1;
  for (int a = 0; a < dim_; ++a) {
    const auto& b = bounds_[a];
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi)) {
      throw InvalidArgument("degenerate interval on axis " + std::to_string(a) + ": [" +
                            std::to_string(b.lo) + ", " + std::to_string(b.hi) + "]");
    }
    if (n_[a] < 3) {
      throw InvalidArgument("axis " + std::to_string(a) + " needs at least 3 points");
    }
    h_.push_back((b.hi - b.lo) / static_cast<double>(n_[a] - 1));
    size_ *= n_[a];
  }
  stride0_ = dim_ == 2 ? n_[1] : 1;
}

double Grid::h_min() const { return *std::min_element(h_.begin(), h_.end()); }
double Grid::h_max() const { return *std::max_element(h_.begin(), h_.end()); }

double Grid::cell_volume() const {
  double v = 1.0;
  for (double h : h_) v *= h;
  return v;
}

std::array<std::size_t, 2> Grid::unflatten(std::size_t flat) const {
  if (dim_ == 1) return {flat, 0};
  return {flat / stride0_, flat % stride0_};
}

Point Grid::point(std::size_t flat) const {
  const auto [i, j] = unflatten(flat);
  Point p{coord(0, i), 0.0};
  if (dim_ == 2) p.y = coord(1, j);
  return p;
}

bool Grid::on_boundary(std::size_t flat) const {
  const auto [i, j] = unflatten(flat);
  if (i == 0 || i + 1 == n_[0]) return true;
  if (dim_ == 2 && (j == 0 || j + 1 == n_[1])) return true;
  return false;
}

bool Grid::contains(const Point& p) const {
  if (p.x < bounds_[0].lo || p.x > bounds_[0].hi) return false;
  if (dim_ == 2 && (p.y < bounds_[1].lo || p.y > bounds_[1].hi)) return false;
  return true;
}

std::size_t Grid::nearest_node(const Point& p) const {
  auto axis_index = [&](int a, double v) {
    const double k = std::round((v - bounds_[a].lo) / h_[a]);
    const double clamped = std::clamp(k, 0.0, static_cast<double>(n_[a] - 1));
    return static_cast<std::size_t>(clamped);
  };
  const std::size_t i = axis_index(0, p.x);
  const std::size_t j = dim_ == 2 ? axis_index(1, p.y) : 0;
  return flatten(i, j);
}

Grid make_grid(int dim, const std::vector<Interval>& bounds, const std::vector<std::size_t>& n) {
  return Grid(dim, bounds, n);
}

Grid refine(const Grid& g) {
  std::vector<Interval> b;
  std::vector<std::size_t> n;
  for (int a = 0; a < g.dim(); ++a) {
    b.push_back(g.bounds(a));
    n.push_back(2 * g.n(a) - 1);
  }
  return Grid(g.dim(), b, n);
}

GridField::GridField(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw InvalidArgument("field has " + std::to_string(values_.size()) +
                          " values but the grid has " + std::to_string(grid_.size()) +
                          " nodes");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw InvalidArgument("non-finite field value at node " + std::to_string(i));
    }
  }
}

GridField GridField::indicator(Grid grid, std::vector<double> values) {
  for (double v : values) {
    if (v != 0.0 && v != 1.0) throw InvalidArgument("indicator values must be 0 or 1");
  }
  GridField f(std::move(grid), std::move(values));
  f.indicator_ = true;
  return f;
}

GridField GridField::zeros(const Grid& grid) {
  return GridField(grid, std::vector<double>(grid.size(), 0.0));
}

std::vector<double> trapezoid_weights(const Grid& g) {
  auto axis_weights = [&](int a) {
    std::vector<double> w(g.n(a), g.h(a));
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
  };
  const auto wx = axis_weights(0);
  if (g.dim() == 1) return wx;
  const auto wy = axis_weights(1);
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < g.n(0); ++i) {
    for (std::size_t j = 0; j < g.n(1); ++j) w[g.flatten(i, j)] = wx[i] * wy[j];
  }
  return w;
}

namespace {

// Trapezoid along a contiguous row: h * (sum - (first + last) / 2).
double trapezoid_row(const double* v, std::size_t n, double h) {
  const double s = simd::kernels().sum(v, n);
  return h * (s - 0.5 * (v[0] + v[n - 1]));
}

}  // namespace

double integrate(const GridField& f) {
  const Grid& g = f.grid();
  const auto v = f.values();
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidArgument("integrate: non-finite integrand");
  }
  if (g.dim() == 1) return trapezoid_row(v.data(), v.size(), g.h(0));
  std::vector<double> rows(g.n(0));
  for (std::size_t i = 0; i < g.n(0); ++i) {
    rows[i] = trapezoid_row(v.data() + g.flatten(i, 0), g.n(1), g.h(1));
  }
  return trapezoid_row(rows.data(), rows.size(), g.h(0));
}

std::array<std::vector<double>, 2> gradient(const GridField& f) {
  const Grid& g = f.grid();
  const auto v = f.values();
  std::array<std::vector<double>, 2> d;
  for (int a = 0; a < g.dim(); ++a) {
    d[a].assign(g.size(), 0.0);
    const std::size_t n = g.n(a);
    const std::size_t stride = (a == 0 && g.dim() == 2) ? g.n(1) : 1;
    const double h = g.h(a);
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
      const std::size_t k = g.unflatten(flat)[a];
      double deriv;
      if (k == 0) {
        deriv = (v[flat + stride] - v[flat]) / h;
      } else if (k + 1 == n) {
        deriv = (v[flat] - v[flat - stride]) / h;
      } else {
        deriv = (v[flat + stride] - v[flat - stride]) / (2.0 * h);
      }
      d[a][flat] = deriv;
    }
  }
  return d;
}

GridField gradient_sq(const GridField& f) {
  const auto d = gradient(f);
  std::vector<double> out(f.size(), 0.0);
  for (int a = 0; a < f.grid().dim(); ++a) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += d[a][i] * d[a][i];
  }
  return GridField(f.grid(), std::move(out));
}

std::vector<double> laplacian(const GridField& f) {
  const Grid& g = f.grid();
  const auto v = f.values();
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    if (g.on_boundary(flat)) continue;
    double lap = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      const std::size_t stride = (a == 0 && g.dim() == 2) ? g.n(1) : 1;
      const double h2 = g.h(a) * g.h(a);
      lap += (v[flat - stride] - 2.0 * v[flat] + v[flat + stride]) / h2;
    }
    out[flat] = lap;
  }
  return out;
}

void require_same_grid(const GridField& a, const GridField& b, const char* what) {
  if (!(a.grid() == b.grid())) {
    throw InvalidArgument(std::string(what) + ": fields live on different grids");
  }
}

}  // namespace agmonkit
