#include <catch_amalgamated.hpp>

#include <cmath>

#include "agmonkit/agmon.hpp"
#include "agmonkit/potential.hpp"
#include "agmonkit/spectral.hpp"
#include "agmonkit/verify.hpp"

using namespace agmonkit;
using Catch::Approx;

namespace {

VerificationInput harmonic_input(const Weight& w, double eps, double delta, std::size_t n = 1201) {
  const GridField v = sample(PotentialSpec::harmonic(), Grid(1, {{-6, 6}}, {n}));
  const auto pair = lowest_eigenpairs(assemble_hamiltonian(v), 1, 1e-10)[0];
  return VerificationInput{v, pair, agmon_1d(v, pair.E), w, eps, delta};
}

double psi_norm2(const VerificationInput& in) {
  std::vector<double> sq(in.psi().size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = in.psi()[i] * in.psi()[i];
  return integrate(GridField(in.psi().grid(), sq));
}

}  // namespace

TEST_CASE("zero distance reduces the constants to plain norms") {
  auto in = harmonic_input(Weight::exponential(0.5), 0.5, 0.5);
  in.rho.rho = GridField::zeros(in.V.grid());
  CHECK(weighted_l2_norm(in) == Approx(psi_norm2(in)));
  CHECK(integrability_constant(in) == Approx(sublevel_measure(sublevel_indicator(in.V, in.E() + 0.5))));
}

TEST_CASE("theorem 1 bound holds on the harmonic ground state") {
  const auto in = harmonic_input(Weight::exponential(0.5), 0.5, 0.5);
  const auto t = theorem1_bound(in);
  CHECK(t.eta == Approx(1.0 - 0.25 * 0.5));
  CHECK(t.C2 == Approx(std::pow(sup_norm(in.psi()), 2) * t.S));
  CHECK(t.C1 == Approx(in.E() * t.C2));  // m_V = 0
  CHECK(t.c_eps_delta == Approx(t.C1 / (t.eta * 0.5) + t.C2));
  CHECK(t.lhs == Approx(weighted_l2_norm(in)));
  CHECK(t.pass);
}

TEST_CASE("theorem 1 refuses epsilon at or below the threshold") {
  const auto in = harmonic_input(Weight::power(2.0), 0.75, 0.5, 401);
  CHECK_THROWS_AS(theorem1_bound(in), ThresholdError);
  try {
    theorem1_bound(in);
  } catch (const ThresholdError& e) {
    CHECK(e.threshold() == 0.75);
  }
  CHECK_THROWS_AS(lemma1_inequality_check(in, 0.1), ThresholdError);
}

TEST_CASE("lemma 1 inequality and the orthogonality term") {
  const auto in = harmonic_input(Weight::exponential(0.5), 0.5, 0.5);
  double prev_lhs = -1.0;
  for (double a : {1.0, 0.1, 0.01, 0.0}) {
    const auto r = lemma1_inequality_check(in, a);
    CHECK(r.pass);
    CHECK(r.margin >= 0.0);
    CHECK(std::fabs(r.orthogonality) <= r.orthogonality_bound * (1 + 1e-9));
    CHECK(r.lhs >= prev_lhs);  // phi(f_alpha) grows as alpha decreases
    prev_lhs = r.lhs;
  }
}

TEST_CASE("lemma 1 with V below E everywhere") {
  // rho = 0, and (V - E)_- covers all of psi: RHS >= ||psi||^2.
  const GridField v = sample(PotentialSpec::constant(-5.0), Grid(1, {{-3, 3}}, {301}));
  const auto pair = lowest_eigenpairs(assemble_hamiltonian(v), 1, 1e-11)[0];
  const VerificationInput in{v, pair, agmon_1d(v, pair.E), Weight::exponential(0.5), 0.5, 0.1};
  const auto r = lemma1_inequality_check(in, 0.5);
  CHECK(r.lhs == Approx(psi_norm2(in)));
  CHECK(r.margin >= 0.0);
}

TEST_CASE("gauge fields") {
  const auto in = harmonic_input(Weight::exponential(0.5), 0.5, 0.5, 601);
  const auto g0 = gauge_fields(in, 0.0);
  const auto g1 = gauge_fields(in, 1.0);
  for (std::size_t i = 0; i < in.psi().size(); ++i) {
    const double f0 = 0.5 * in.rho.rho[i];
    CHECK(g0.f_alpha[i] == Approx(f0));
    CHECK(g1.f_alpha[i] == Approx(f0 / (1.0 + f0)));
    CHECK(g1.Phi_alpha[i] == Approx(std::exp(0.5 * g1.f_alpha[i]) * in.psi()[i]));
  }
}

TEST_CASE("cutoff profile") {
  const Cutoff chi{2.0};
  CHECK(chi.value(1.0) == 0.0);
  CHECK(chi.value(2.0) == 0.0);
  CHECK(chi.value(2.5) == 0.5);
  CHECK(chi.value(3.0) == 1.0);
  CHECK(chi.value(9.0) == 1.0);
  CHECK(chi.dr(2.5) == Cutoff::sup_gradient);
  double sup = 0.0;
  for (double r = 1.9; r < 3.1; r += 1e-3) {
    sup = std::max(sup, std::fabs(chi.dr(r)));
    if (r > 2.01 && r < 2.99) {
      const double fd = (chi.value(r + 1e-6) - chi.value(r - 1e-6)) / 2e-6;
      CHECK(chi.dr(r) == Approx(fd).epsilon(1e-6));
      const double fdd = (chi.dr(r + 1e-6) - chi.dr(r - 1e-6)) / 2e-6;
      CHECK(chi.drr(r) == Approx(fdd).margin(1e-5));
    }
  }
  CHECK(sup <= Cutoff::sup_gradient);
  CHECK(chi.drr(2.0) == 3.0);
  CHECK(chi.drr(3.0) == -3.0);
}

TEST_CASE("lemma 2 identity converges at second order") {
  double prev = 0.0;
  for (std::size_t n : {1201u, 2401u}) {
    auto in = harmonic_input(Weight::power(2.0), 0.3, 0.5, n);
    const auto r = lemma2_identity_check(in, 0.1, 1.0);
    CHECK_FALSE(r.degenerate);
    CHECK(r.rel_error <= 5e-3);
    if (prev > 0.0) CHECK(prev / r.rel_error == Approx(4.0).epsilon(0.1));
    prev = r.rel_error;
  }
}

TEST_CASE("lemma 2 degenerate and disjoint-support cases") {
  auto in = harmonic_input(Weight::power(1.0), 0.5, 0.5, 601);
  // chi = 1 on the grid: both sides reduce to <phi^2 psi, (H - E) psi>.
  const auto one = lemma2_identity_check(in, 0.1, -1.0);
  CHECK(one.degenerate);
  CHECK(one.rhs == 0.0);
  CHECK(one.abs_error <= 10.0 * in.pair.residual * std::sqrt(psi_norm2(in)) * std::exp(4.0));
  // chi = 0 on the grid.
  const auto zero = lemma2_identity_check(in, 0.1, 10.0);
  CHECK(zero.degenerate);
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs == 0.0);
  // A bump inside B_R never meets grad chi.
  std::vector<double> bump(in.psi().size());
  for (std::size_t i = 0; i < bump.size(); ++i) {
    const double x = in.V.grid().point(i).x;
    bump[i] = std::fabs(x) < 1.0 ? std::pow(1.0 - x * x, 3) : 0.0;
  }
  in.pair.psi = GridField(in.V.grid(), bump);
  const auto b = lemma2_identity_check(in, 0.1, 2.0);
  CHECK(b.lhs == 0.0);
  CHECK(b.rhs == 0.0);
  CHECK_THROWS_AS(lemma2_identity_check(in, 0.1, 5.5), InvalidArgument);
}

TEST_CASE("theorem 2 bound") {
  const auto in = harmonic_input(Weight::power(2.0), 0.3, 0.5);
  CHECK(theorem2_min_radius(in.w) == 1.0);
  const auto r = theorem2_bound(in, 2.0);
  CHECK(r.pass);
  CHECK(r.total_bound == Approx(r.ball_sup_term + r.a_eps_delta + r.C2));
  CHECK(r.lhs <= r.total_bound);
  CHECK_THROWS_AS(theorem2_bound(in, 0.5), InvalidArgument);
  CHECK_THROWS_AS(theorem2_bound(in, 5.5), InvalidArgument);
  const auto ex = harmonic_input(Weight::exponential(0.5), 0.3, 0.5, 401);
  CHECK_THROWS_AS(theorem2_bound(ex, 2.0), InvalidArgument);
}

TEST_CASE("pointwise envelope and ball ratios") {
  const auto in = harmonic_input(Weight::exponential(0.5), 0.5, 0.5);
  const auto env = pointwise_envelope(in);
  CHECK(env.C_eps >= sup_norm(in.psi()));
  CHECK(env.pass);
  CHECK(env.C_eps <= env.theory_bound);
  const auto br = ball_ratio_bound_check(in, 50);
  CHECK(br.centers == 50);
  CHECK(br.violations == 0);
  CHECK(br.max_ratio >= 1.0);
  CHECK(br.pass);
}

TEST_CASE("summability brackets on the harmonic well") {
  const auto in = harmonic_input(Weight::exponential(0.5), 0.5, 0.5);
  const auto dec = interval_decomposition_1d(sublevel_indicator(in.V, in.E() + in.delta));
  const auto sb = summability_bounds_1d(dec, in.rho, in.w, in.epsilon);
  CHECK(sb.pass);
  for (const auto* f : {&sb.right, &sb.left}) {
    CHECK(f->lower <= f->restricted);
    CHECK(f->restricted <= f->upper + f->cell_slack);
  }
  CHECK(sb.right.restricted + sb.left.restricted == Approx(integrability_constant(in)).epsilon(0.02));
}

TEST_CASE("verification input is validated") {
  auto in = harmonic_input(Weight::exponential(0.5), 0.5, 0.5, 401);
  in.delta = 0.0;
  CHECK_THROWS_AS(in.validate(), InvalidArgument);
  in.delta = 0.5;
  in.epsilon = 1.0;
  CHECK_THROWS_AS(in.validate(), InvalidArgument);
  in.epsilon = 0.5;
  in.rho.rho = GridField::zeros(Grid(1, {{-6, 6}}, {5}));
  CHECK_THROWS_AS(in.validate(), InvalidArgument);
}
