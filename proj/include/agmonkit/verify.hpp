#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "agmonkit/agmon.hpp"
#include "agmonkit/grid.hpp"
#include "agmonkit/potential.hpp"
#include "agmonkit/spectral.hpp"
#include "agmonkit/weights.hpp"

namespace agmonkit {

/// The tuple (V, E, psi, rho_E, phi, epsilon, delta) every check works on.
/// All fields share one grid.
struct VerificationInput {
  GridField V;
  EigenPair pair;
  AgmonField rho;
  Weight w = Weight::power(1.0);
  double epsilon = 0.5;
  double delta = 0.1;

  /// Throws unless the grids agree, 0 < epsilon < 1 and delta > 0.
  void validate() const;
  double E() const { return pair.E; }
  const GridField& psi() const { return pair.psi; }
};

struct VerifyOptions {
  /// Multiplicative slack on every inequality.
  double tol_disc = 1e-2;
};

/// ||chi_{V <= E + delta} phi((1 - eps) rho)||_2^2
double integrability_constant(const VerificationInput& in);
/// int phi((1 - eps) rho)^2 |psi|^2
double weighted_l2_norm(const VerificationInput& in);
/// Grid max of |psi|.
double sup_norm(const GridField& f);

struct Theorem1Result {
  double S = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double eta = 0.0;
  double c_eps_delta = 0.0;
  double lhs = 0.0;
  bool pass = false;
};

/// C1 = (E - m_V) ||psi||_inf^2 S, C2 = ||psi||_inf^2 S, eta = 1 - M^2 (1 - eps),
/// c = C1 / (eta delta) + C2. Throws ThresholdError when epsilon does not
/// exceed max{0, 1 - M^-2}; use theorem2_bound there.
Theorem1Result theorem1_bound(const VerificationInput& in, const VerifyOptions& opt = {});

struct GaugeFields {
  double alpha = 0.0;
  GridField f_alpha;
  GridField phi_f;
  GridField Phi_alpha;
};

/// f_alpha = f0 / (1 + alpha f0) with f0 = (1 - eps) rho; Phi_alpha = phi(f_alpha) psi.
GaugeFields gauge_fields(const VerificationInput& in, double alpha);

/// (H - E) psi on the grid, zero on the boundary.
GridField apply_h_minus_e(const GridField& v, const GridField& psi, double E);

struct Lemma1Result {
  double alpha = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  /// <phi(f)^2 psi, (H - E) psi> and its Cauchy-Schwarz bound ||phi^2 psi|| * residual.
  double orthogonality = 0.0;
  double orthogonality_bound = 0.0;
  bool pass = false;
};

/// ||Phi_a||^2 <= (1/(eta delta)) {<phi^2 psi, (H - E) psi> + int |Phi_a|^2 (V - E)_-}
///                + int_{V <= E + delta} |Phi_a|^2.
/// Needs epsilon above the threshold; margin = RHS - LHS.
Lemma1Result lemma1_inequality_check(const VerificationInput& in, double alpha,
                                     const VerifyOptions& opt = {});

/// Radial cutoff: 0 on B_R, 1 outside B_{R+1}, cubic smoothstep between.
/// sup |grad chi| = 1.5.
struct Cutoff {
  double R = 0.0;
  static constexpr double sup_gradient = 1.5;
  double value(double r) const;
  /// d chi / dr
  double dr(double r) const;
  /// d^2 chi / dr^2; the mean of the one-sided values at r = R and r = R + 1.
  double drr(double r) const;
};

struct Lemma2Result {
  double alpha = 0.0;
  double R = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;
  /// The annulus misses the grid: chi = 0 on it (R past the corners) or
  /// chi = 1 on it (R <= -1), so both sides are residual-sized.
  bool degenerate = false;
};

/// Re<Phi_{a,R}, (H_f - E) Phi_{a,R}> against int xi phi(f)^2 psi^2 with
/// xi = |grad chi|^2 + 2 chi (grad chi . grad f) phi'(f)/phi(f).
/// Throws if the transition annulus leaves the grid without covering it.
Lemma2Result lemma2_identity_check(const VerificationInput& in, double alpha, double R);

struct Theorem2Result {
  double R = 0.0;
  double S = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double annulus_sup = 0.0;
  double a_eps_delta = 0.0;
  double ball_sup_term = 0.0;
  double total_bound = 0.0;
  double lhs = 0.0;
  bool pass = false;
};

/// Smallest admissible cutoff radius: sup_{t > R} |phi'/phi| <= 1.
double theorem2_min_radius(const Weight& w);

/// Needs phi'/phi -> 0 and R >= theorem2_min_radius(w); any epsilon in (0, 1).
Theorem2Result theorem2_bound(const VerificationInput& in, double R,
                              const VerifyOptions& opt = {});

struct EnvelopeResult {
  double C_eps = 0.0;
  /// Fitted max over a ball cover of ||psi||_{inf, B_1/2} / ||psi||_{2, B_1}.
  double C_EV = 0.0;
  double lipschitz_c = 0.0;
  double ball_factor = 0.0;
  double theory_bound = 0.0;
  std::size_t balls = 0;
  bool pass = false;
};

/// C_eps = max |psi| phi((1 - eps) rho), compared with C_EV e^{2 M (1-eps) c} ||psi phi||_2.
EnvelopeResult pointwise_envelope(const VerificationInput& in, const VerifyOptions& opt = {});

struct BallRatioResult {
  double bound = 0.0;
  double max_ratio = 0.0;
  /// max_ratio / bound - 1; <= tol_disc passes.
  double worst_slack = 0.0;
  std::size_t centers = 0;
  std::size_t skipped = 0;
  std::size_t violations = 0;
  bool pass = false;
};

/// sup over B_1(x0) of phi(f(x))/phi(f(y)) for evenly spaced x0, against
/// e^{2 M (1 - eps) c} with c = sqrt((max V - E)_+).
BallRatioResult ball_ratio_bound_check(const VerificationInput& in, int n_centers,
                                       const VerifyOptions& opt = {});

struct FamilySums {
  double lower = 0.0;
  double upper = 0.0;
  /// Trapezoid integral of phi(f0)^2 over the intervals themselves.
  double restricted = 0.0;
  /// Half-line quadrature of chi phi(f0)^2, which also counts single nodes.
  double half_line = 0.0;
  /// One cell per interval, weighted by the larger endpoint weight.
  double cell_slack = 0.0;
};

struct SummabilityResult {
  FamilySums right;
  FamilySums left;
  bool pass = false;
};

/// Bracketing sums over each family; right: phi at a_j below, b_j above;
/// left: the endpoints swap roles.
SummabilityResult summability_bounds_1d(const IntervalDecomposition& decomp,
                                        const AgmonField& rho, const Weight& w, double epsilon);

}  // namespace agmonkit
