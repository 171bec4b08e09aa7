#include "agmonkit/agmon.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <utility>

#include "agmonkit/error.hpp"

namespace agmonkit {
namespace {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::size_t resolve_source(const Grid& g, const Point& p, double& snap) {
  if (!g.contains(p)) throw InvalidArgument("source point lies outside the grid");
  const std::size_t node = g.nearest_node(p);
  snap = distance(g.point(node), p);
  return node;
}

// Solves sum_k ((u - a_k)_+ / h_k)^2 = s^2 for the smallest admissible u,
// using the axes in increasing order of a_k.
double eikonal_update(double a0, double h0, double a1, double h1, double s) {
  if (a1 < a0) {
    std::swap(a0, a1);
    std::swap(h0, h1);
  }
  const double one = a0 + h0 * s;
  if (one <= a1) return one;
  // Two-sided: (u - a0)^2 / h0^2 + (u - a1)^2 / h1^2 = s^2.
  const double w0 = 1.0 / (h0 * h0);
  const double w1 = 1.0 / (h1 * h1);
  const double A = w0 + w1;
  const double B = -2.0 * (w0 * a0 + w1 * a1);
  const double C = w0 * a0 * a0 + w1 * a1 * a1 - s * s;
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) return one;
  const double u = (-B + std::sqrt(disc)) / (2.0 * A);
  return u >= a1 ? u : one;
}

}  // namespace

std::string method_name(AgmonMethod m) {
  return m == AgmonMethod::quadrature_1d ? "quadrature_1d" : "fast_marching";
}

std::vector<double> slowness(const GridField& v, double E) {
  std::vector<double> s(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) s[i] = v[i] > E ? std::sqrt(v[i] - E) : 0.0;
  return s;
}

AgmonField agmon_1d(const GridField& v, double E) {
  const Grid& g = v.grid();
  if (g.dim() != 1) throw InvalidArgument("agmon_1d needs a 1D grid");
  AgmonField out;
  out.E = E;
  out.method = AgmonMethod::quadrature_1d;
  out.source = resolve_source(g, Point{0.0, 0.0}, out.snap_distance);

  const auto s = slowness(v, E);
  const double h = g.h(0);
  const std::size_t n = g.n(0);
  const std::size_t o = out.source;
  std::vector<double> rho(n, 0.0);
  for (std::size_t i = o + 1; i < n; ++i) rho[i] = rho[i - 1] + 0.5 * h * (s[i - 1] + s[i]);
  for (std::size_t i = o; i-- > 0;) rho[i] = rho[i + 1] + 0.5 * h * (s[i + 1] + s[i]);
  out.rho = GridField(g, std::move(rho));
  return out;
}

AgmonField agmon_fast_march(const GridField& v, double E, std::optional<Point> source) {
  const Grid& g = v.grid();
  AgmonField out;
  out.E = E;
  out.method = AgmonMethod::fast_marching;
  out.source = resolve_source(g, source.value_or(Point{0.0, 0.0}), out.snap_distance);

  const auto s = slowness(v, E);
  const std::size_t N = g.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(N, inf);
  std::vector<char> known(N, 0);

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
  u[out.source] = 0.0;
  queue.push({0.0, out.source});

  const int dim = g.dim();
  const std::size_t n0 = g.n(0);
  const std::size_t n1 = dim == 2 ? g.n(1) : 1;
  const double h0 = g.h(0);
  const double h1 = dim == 2 ? g.h(1) : 1.0;

  // Smallest known neighbour value along an axis, or inf.
  auto axis_min = [&](std::size_t i, std::size_t j, int axis) {
    double best = inf;
    if (axis == 0) {
      if (i > 0 && known[g.flatten(i - 1, j)]) best = std::min(best, u[g.flatten(i - 1, j)]);
      if (i + 1 < n0 && known[g.flatten(i + 1, j)]) best = std::min(best, u[g.flatten(i + 1, j)]);
    } else {
      if (j > 0 && known[g.flatten(i, j - 1)]) best = std::min(best, u[g.flatten(i, j - 1)]);
      if (j + 1 < n1 && known[g.flatten(i, j + 1)]) best = std::min(best, u[g.flatten(i, j + 1)]);
    }
    return best;
  };

  auto update = [&](std::size_t i, std::size_t j) {
    const std::size_t k = g.flatten(i, j);
    if (known[k]) return;
    const double a0 = axis_min(i, j, 0);
    double cand;
    if (dim == 1) {
      cand = a0 + h0 * s[k];
    } else {
      const double a1 = axis_min(i, j, 1);
      if (a0 == inf) {
        cand = a1 + h1 * s[k];
      } else if (a1 == inf) {
        cand = a0 + h0 * s[k];
      } else {
        cand = eikonal_update(a0, h0, a1, h1, s[k]);
      }
    }
    if (cand < u[k]) {
      u[k] = cand;
      queue.push({cand, k});
    }
  };

  while (!queue.empty()) {
    const auto [val, k] = queue.top();
    queue.pop();
    if (known[k] || val > u[k]) continue;
    known[k] = 1;
    const auto ij = g.unflatten(k);
    const std::size_t i = ij[0];
    const std::size_t j = ij[1];
    if (i > 0) update(i - 1, j);
    if (i + 1 < n0) update(i + 1, j);
    if (dim == 2) {
      if (j > 0) update(i, j - 1);
      if (j + 1 < n1) update(i, j + 1);
    }
  }
  out.rho = GridField(g, std::move(u));
  return out;
}

double check_eikonal(const AgmonField& rho, const GridField& v, double E) {
  require_same_grid(rho.rho, v, "check_eikonal");
  const Grid& g = v.grid();
  const GridField grad = gradient_sq(rho.rho);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.on_boundary(k)) continue;
    const double rhs = v[k] > E ? v[k] - E : 0.0;
    worst = std::max(worst, grad[k] - rhs);
  }
  return worst;
}

ShellDiagnostic check_rho_to_infinity(const AgmonField& rho, int shells) {
  if (shells < 2) throw InvalidArgument("check_rho_to_infinity needs shells >= 2");
  const Grid& g = rho.rho.grid();
  const Point c = g.point(rho.source);
  double r_max = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.dim(); ++a) {
    const double x = a == 0 ? c.x : c.y;
    r_max = std::min({r_max, x - g.bounds(a).lo, g.bounds(a).hi - x});
  }
  ShellDiagnostic d;
  const double width = r_max / shells;
  if (width < g.h_max()) throw InvalidArgument("shells are thinner than one grid cell");
  d.minima.assign(static_cast<std::size_t>(shells), std::numeric_limits<double>::infinity());
  for (int k = 0; k < shells; ++k) d.inner_radius.push_back(k * width);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = distance(g.point(i), c);
    if (r > r_max) continue;
    const auto k = std::min(static_cast<std::size_t>(r / width), static_cast<std::size_t>(shells - 1));
    d.minima[k] = std::min(d.minima[k], rho.rho[i]);
  }
  d.strictly_increasing = true;
  for (std::size_t k = 1; k < d.minima.size(); ++k) {
    if (!(d.minima[k] > d.minima[k - 1])) d.strictly_increasing = false;
  }
  return d;
}

}  // namespace agmonkit
