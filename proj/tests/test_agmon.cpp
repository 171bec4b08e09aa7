#include <catch_amalgamated.hpp>

#include <cmath>

#include "agmonkit/agmon.hpp"
#include "agmonkit/potential.hpp"

using namespace agmonkit;
using Catch::Approx;

namespace {

Grid line(double lo, double hi, std::size_t n) { return Grid(1, {{lo, hi}}, {n}); }

}  // namespace

TEST_CASE("constant potential gives a linear 1D distance") {
  const Grid g = line(-2, 3, 51);
  const GridField v = sample(PotentialSpec::constant(4.0), g);
  const auto rho = agmon_1d(v, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(rho.rho[i] == Approx(2.0 * std::fabs(g.point(i).x)));
  CHECK(rho.rho[rho.source] == 0.0);
  CHECK(check_eikonal(rho, v, 0.0) <= 1e-10);
  const auto fm = agmon_fast_march(v, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(fm.rho[i] == Approx(rho.rho[i]));
}

TEST_CASE("classically allowed region costs nothing") {
  const Grid g = line(-3, 3, 61);
  const GridField v = sample(PotentialSpec::square_well(2.0, 1.0), g);
  const auto rho = agmon_1d(v, -1.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::fabs(g.point(i).x) < 0.999) CHECK(rho.rho[i] == 0.0);
  }
  // The edge node sits at V = E, so the first outer cell carries half weight.
  CHECK(rho.rho[g.size() - 1] == Approx(2.0 - 0.05).epsilon(1e-12));
}

TEST_CASE("zero field is eikonal-consistent") {
  const Grid g = line(-1, 1, 21);
  const GridField v = sample(PotentialSpec::harmonic(), g);
  AgmonField rho;
  rho.rho = GridField::zeros(g);
  // |grad 0|^2 - (V - E)_+ with E = -1: -min over interior of (x^2 + 1).
  CHECK(check_eikonal(rho, v, -1.0) == Approx(-1.0));
}

TEST_CASE("quadrature requires the origin inside the grid") {
  const GridField v = sample(PotentialSpec::constant(1.0), line(1, 2, 11));
  CHECK_THROWS_AS(agmon_1d(v, 0.0), InvalidArgument);
  CHECK_THROWS_AS(agmon_1d(sample(PotentialSpec::constant(1.0), Grid(2, {{-1, 1}, {-1, 1}}, {5, 5})), 0.0),
                  InvalidArgument);
}

TEST_CASE("fast marching on a constant 2D potential approximates Euclidean distance") {
  for (std::size_t n : {41u, 81u}) {
    const Grid g(2, {{-2, 2}, {-2, 2}}, {n, n});
    const auto rho = agmon_fast_march(sample(PotentialSpec::constant(1.0), g), 0.0);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point p = g.point(i);
      const double d = std::hypot(p.x, p.y);
      CHECK(rho.rho[i] >= d - 1e-12);  // first-order upwinding overestimates off-axis
      err = std::max(err, rho.rho[i] - d);
    }
    // O(h log 1/h) error of the first-order scheme from a point source.
    CHECK(err <= 2.5 * g.h(0) * std::log(1.0 / g.h(0)) + 0.1);
    // Exact along the axes.
    CHECK(rho.rho[g.flatten(n - 1, (n - 1) / 2)] == Approx(2.0));
  }
}

TEST_CASE("fast marching respects the source and reports the snap") {
  const Grid g(2, {{-1, 1}, {-1, 1}}, {11, 11});
  const GridField v = sample(PotentialSpec::constant(1.0), g);
  const auto rho = agmon_fast_march(v, 0.0, Point{0.52, -0.31});
  CHECK(rho.source == g.nearest_node({0.52, -0.31}));
  CHECK(rho.snap_distance == Approx(std::hypot(0.08, 0.09)));
  CHECK(rho.rho[rho.source] == 0.0);
  CHECK_THROWS_AS(agmon_fast_march(v, 0.0, Point{3.0, 0.0}), InvalidArgument);
}

TEST_CASE("fast marching is symmetric for a symmetric potential") {
  const Grid g(2, {{-3, 3}, {-3, 3}}, {61, 61});
  const auto rho = agmon_fast_march(sample(PotentialSpec::harmonic(), g), 0.5);
  for (std::size_t i = 0; i < g.n(0); ++i) {
    for (std::size_t j = 0; j < g.n(1); ++j) {
      CHECK(rho.rho[g.flatten(i, j)] == Approx(rho.rho[g.flatten(j, i)]).margin(1e-12));
      CHECK(rho.rho[g.flatten(i, j)] == Approx(rho.rho[g.flatten(60 - i, j)]).margin(1e-12));
    }
  }
}

TEST_CASE("1D fast marching and quadrature differ by O(h)") {
  const auto spec = PotentialSpec::harmonic();
  double prev = 0.0;
  for (std::size_t n : {401u, 801u}) {
    const GridField v = sample(spec, line(-4, 4, n));
    const auto q = agmon_1d(v, 1.0);
    const auto fm = agmon_fast_march(v, 1.0);
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) d = std::max(d, std::fabs(q.rho[i] - fm.rho[i]));
    if (prev > 0.0) CHECK(prev / d == Approx(2.0).epsilon(0.05));
    prev = d;
  }
}

TEST_CASE("shell minima increase for a confining potential") {
  const auto rho = agmon_1d(sample(PotentialSpec::harmonic(), line(-6, 6, 601)), 1.0);
  const auto sh = check_rho_to_infinity(rho, 5);
  CHECK(sh.minima.size() == 5);
  CHECK(sh.strictly_increasing);
  CHECK(std::string(ShellDiagnostic::label) == "heuristic");
  CHECK_THROWS_AS(check_rho_to_infinity(rho, 1), InvalidArgument);
}

TEST_CASE("slowness is the root of the positive part") {
  const GridField v(line(0, 1, 3), {-1.0, 0.5, 4.0});
  const auto s = slowness(v, 0.0);
  CHECK(s == std::vector<double>{0.0, std::sqrt(0.5), 2.0});
}
