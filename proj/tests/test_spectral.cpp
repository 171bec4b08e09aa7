#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "agmonkit/potential.hpp"
#include "agmonkit/simd.hpp"
#include "agmonkit/spectral.hpp"

using namespace agmonkit;
using Catch::Approx;

namespace {

Grid line(double lo, double hi, std::size_t n) { return Grid(1, {{lo, hi}}, {n}); }

// Discrete Dirichlet Laplacian eigenvalue on [0, L] with n nodes.
double discrete_box(int k, double L, std::size_t n) {
  const double h = L / static_cast<double>(n - 1);
  return 4.0 / (h * h) * std::pow(std::sin(k * M_PI * h / (2.0 * L)), 2);
}

}  // namespace

TEST_CASE("Hamiltonian layout and stencil") {
  const Grid g(2, {{0, 1}, {0, 2}}, {5, 9});
  const HamiltonianOp h(sample(PotentialSpec::constant(3.0), g));
  CHECK(h.rows() == 3);
  CHECK(h.cols() == 7);
  CHECK(h.size() == 21);
  CHECK(h.coupling_between_rows() == Approx(16.0));
  CHECK(h.coupling_in_row() == Approx(16.0));
  CHECK(h.diagonal()[0] == Approx(3.0 + 64.0));
  const HamiltonianOp h1(sample(PotentialSpec::constant(0.0), line(0, 1, 6)));
  CHECK(h1.rows() == 1);
  CHECK(h1.coupling_between_rows() == 0.0);
}

TEST_CASE("Hamiltonian is symmetric in its inner product") {
  const Grid g(2, {{-1, 1}, {-1, 1}}, {13, 11});
  const HamiltonianOp h(sample(PotentialSpec::gaussian_well(1.0, 0.5), g));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d;
  std::vector<double> u(h.size()), w(h.size()), hu(h.size()), hw(h.size());
  for (auto& x : u) x = d(rng);
  for (auto& x : w) x = d(rng);
  h.apply(u, hu);
  h.apply(w, hw);
  CHECK(h.inner(u, hw) == Approx(h.inner(hu, w)).epsilon(1e-12));
  CHECK(h.norm(u) == Approx(std::sqrt(h.inner(u, u))));
}

TEST_CASE("restrict and embed are inverse on interior values") {
  const Grid g(2, {{0, 1}, {0, 1}}, {6, 5});
  const HamiltonianOp h(sample(PotentialSpec::constant(0.0), g));
  std::vector<double> u(h.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = static_cast<double>(i) + 1.0;
  const GridField f = h.embed(u);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.on_boundary(i)) CHECK(f[i] == 0.0);
  }
  CHECK(h.restrict_field(f) == u);
}

TEST_CASE("particle in a box matches the discrete spectrum") {
  const std::size_t n = 101;
  const auto pairs = lowest_eigenpairs(assemble_hamiltonian(sample(PotentialSpec::constant(0.0), line(0, M_PI, n))),
                                       3, 1e-11);
  for (int k = 0; k < 3; ++k) {
    CHECK(pairs[k].E == Approx(discrete_box(k + 1, M_PI, n)).epsilon(1e-10));
    CHECK(pairs[k].residual <= 1e-11);
  }
  // Orthonormal in the grid inner product, positive largest entry.
  const HamiltonianOp h(sample(PotentialSpec::constant(0.0), line(0, M_PI, n)));
  for (int a = 0; a < 3; ++a) {
    const auto ua = h.restrict_field(pairs[a].psi);
    CHECK(h.norm(ua) == Approx(1.0));
    double big = 0.0;
    for (double x : pairs[a].psi.values()) big = std::fabs(x) > std::fabs(big) ? x : big;
    CHECK(big > 0.0);
    for (int b = a + 1; b < 3; ++b) CHECK(std::fabs(h.inner(ua, h.restrict_field(pairs[b].psi))) <= 1e-8);
  }
}

TEST_CASE("2D box eigenvalues separate") {
  const Grid g(2, {{0, M_PI}, {0, M_PI}}, {41, 41});
  const auto pairs = lowest_eigenpairs(assemble_hamiltonian(sample(PotentialSpec::constant(0.0), g)), 1, 1e-9);
  CHECK(pairs[0].E == Approx(2.0 * discrete_box(1, M_PI, 41)).epsilon(1e-9));
}

TEST_CASE("harmonic oscillator spectrum") {
  const auto pairs =
      lowest_eigenpairs(assemble_hamiltonian(sample(PotentialSpec::harmonic(), line(-8, 8, 1601))), 2, 1e-10);
  CHECK(pairs[0].E == Approx(1.0).margin(1e-4));
  CHECK(pairs[1].E == Approx(3.0).margin(1e-4));
  // Ground state is even, the first excited state odd.
  const auto& p0 = pairs[0].psi;
  const auto& p1 = pairs[1].psi;
  CHECK(p0[300] == Approx(p0[1300]).margin(1e-9));
  CHECK(p1[300] == Approx(-p1[1300]).margin(1e-9));
}

TEST_CASE("kernel choice does not change eigenpairs") {
  const simd::KernelTable& before = simd::kernels();
  const HamiltonianOp h(sample(PotentialSpec::gaussian_well(2.0, 1.0), Grid(2, {{-3, 3}, {-3, 3}}, {33, 31})));
  simd::set_kernels(simd::scalar_kernels());
  const auto a = lowest_eigenpairs(h, 1, 1e-9);
  if (const auto* avx = simd::avx2_kernels()) simd::set_kernels(*avx);
  const auto b = lowest_eigenpairs(h, 1, 1e-9);
  simd::set_kernels(before);
  CHECK(a[0].E == b[0].E);
  for (std::size_t i = 0; i < a[0].psi.size(); ++i) CHECK(a[0].psi[i] == b[0].psi[i]);
}

TEST_CASE("shifted solve reaches the requested tolerance") {
  const HamiltonianOp h(sample(PotentialSpec::harmonic(), Grid(2, {{-3, 3}, {-3, 3}}, {31, 31})));
  std::vector<double> b(h.size(), 1.0), x(h.size(), 0.0), r(h.size());
  const int it = solve_shifted(h, -1.0, b, x, 1e-12, 1000);
  CHECK(it > 0);
  h.apply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = r[i] + x[i] - b[i];
  CHECK(h.norm(r) <= 1e-10 * h.norm(b));
}

TEST_CASE("eigensolver reports non-convergence") {
  const HamiltonianOp h(sample(PotentialSpec::harmonic(), line(-5, 5, 201)));
  EigenOptions opt;
  opt.max_iterations = 1;
  CHECK_THROWS_AS(lowest_eigenpairs(h, 1, 1e-14, opt), ConvergenceError);
  CHECK_THROWS_AS(lowest_eigenpairs(h, 0, 1e-8), InvalidArgument);
}

TEST_CASE("gap perturbation floor and bound") {
  const GridField v = sample(PotentialSpec::harmonic(), line(-3, 3, 601));
  const auto p = persson_gap_check(v, 1.0, 0.5);
  CHECK(p.level == 1.5);
  CHECK(p.floor_ok);
  CHECK(p.range_ok);
  CHECK(p.bound_ok);
  CHECK(p.sup_W == Approx(1.5));
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] + p.W[i] >= 1.5 - 1e-12);
  CHECK(p.l2_bound == Approx((1.5 - 0.0) * std::sqrt(p.measure_A)));
  CHECK(p.l2_bound_unrooted == Approx(1.5 * p.measure_A));
  // int_{-a}^{a} (a^2 - x^2)^2 dx = 16 a^5 / 15 with a^2 = 1.5.
  CHECK(p.l2_norm_W == Approx(std::sqrt(16.0 * std::pow(1.5, 2.5) / 15.0)).epsilon(1e-3));
  CHECK_THROWS_AS(persson_gap_check(v, 1.0, 0.0), InvalidArgument);
}
