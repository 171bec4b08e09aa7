#include "agmonkit/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "agmonkit/error.hpp"
#include "agmonkit/field_io.hpp"
#include "agmonkit/simd.hpp"

namespace agmonkit {
namespace {

GridField map_nodes(const Grid& g, std::size_t n, auto&& fn) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
  return GridField(g, std::move(out));
}

std::vector<double> f0_values(const VerificationInput& in) {
  const auto rho = in.rho.rho.values();
  std::vector<double> f(rho.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = (1.0 - in.epsilon) * rho[i];
  return f;
}

double radius(const Point& p) { return std::hypot(p.x, p.y); }

// Largest origin-centred ball inside the grid, and the farthest grid corner.
double inscribed_radius(const Grid& g) {
  double r = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.dim(); ++a) r = std::min({r, -g.bounds(a).lo, g.bounds(a).hi});
  return r;
}

double corner_radius(const Grid& g) {
  double s = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    const double m = std::max(std::fabs(g.bounds(a).lo), std::fabs(g.bounds(a).hi));
    s += m * m;
  }
  return std::sqrt(s);
}

// Calls fn(flat) for every node within distance r of c (closed ball).
template <typename F>
void for_each_in_ball(const Grid& g, const Point& c, double r, F&& fn) {
  auto range = [&](int axis, double x) {
    const double lo = g.bounds(axis).lo;
    const double h = g.h(axis);
    const double k0 = std::ceil((x - r - lo) / h - 1e-9);
    const double k1 = std::floor((x + r - lo) / h + 1e-9);
    const auto n = static_cast<double>(g.n(axis));
    return std::pair<std::size_t, std::size_t>{
        static_cast<std::size_t>(std::clamp(k0, 0.0, n - 1.0)),
        static_cast<std::size_t>(std::clamp(k1, 0.0, n - 1.0))};
  };
  const auto [i0, i1] = range(0, c.x);
  if (g.dim() == 1) {
    for (std::size_t i = i0; i <= i1; ++i) {
      if (std::fabs(g.coord(0, i) - c.x) <= r) fn(i);
    }
    return;
  }
  const auto [j0, j1] = range(1, c.y);
  for (std::size_t i = i0; i <= i1; ++i) {
    const double dx = g.coord(0, i) - c.x;
    for (std::size_t j = j0; j <= j1; ++j) {
      const double dy = g.coord(1, j) - c.y;
      if (dx * dx + dy * dy <= r * r) fn(g.flatten(i, j));
    }
  }
}

bool ball_inside(const Grid& g, const Point& c, double r) {
  const double tol = 1e-12;
  if (c.x - r < g.bounds(0).lo - tol || c.x + r > g.bounds(0).hi + tol) return false;
  if (g.dim() == 2 && (c.y - r < g.bounds(1).lo - tol || c.y + r > g.bounds(1).hi + tol)) {
    return false;
  }
  return true;
}

void require_h2(const VerificationInput& in) {
  const double thr = epsilon_threshold(in.w);
  if (!(in.epsilon > thr)) {
    throw ThresholdError("epsilon = " + format_double(in.epsilon) +
                             " does not exceed the threshold max{0, 1 - M_phi^-2} = " +
                             format_double(thr) + " for " + in.w.describe() +
                             "; use theorem2_bound for this epsilon",
                         thr);
  }
}

struct SCConstants {
  double S, C1, C2;
};

SCConstants s_constants(const VerificationInput& in) {
  const double S = integrability_constant(in);
  const double psi_inf = sup_norm(in.psi());
  const double mV = infimum(in.V);
  return {S, (in.E() - mV) * psi_inf * psi_inf * S, psi_inf * psi_inf * S};
}

}  // namespace

void VerificationInput::validate() const {
  require_same_grid(V, pair.psi, "verification input (V, psi)");
  require_same_grid(V, rho.rho, "verification input (V, rho)");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0, 1)");
  if (!(delta > 0.0)) throw InvalidArgument("delta must be > 0");
}

double sup_norm(const GridField& f) { return simd::max_abs(f.values()); }

double integrability_constant(const VerificationInput& in) {
  in.validate();
  const auto f = f0_values(in);
  const double level = in.E() + in.delta;
  return integrate(map_nodes(in.V.grid(), f.size(), [&](std::size_t i) {
    if (!(in.V[i] <= level)) return 0.0;
    const double p = in.w(f[i]);
    return p * p;
  }));
}

double weighted_l2_norm(const VerificationInput& in) {
  in.validate();
  const auto f = f0_values(in);
  return integrate(map_nodes(in.V.grid(), f.size(), [&](std::size_t i) {
    const double p = in.w(f[i]) * in.psi()[i];
    return p * p;
  }));
}

Theorem1Result theorem1_bound(const VerificationInput& in, const VerifyOptions& opt) {
  in.validate();
  require_h2(in);
  Theorem1Result r;
  const auto sc = s_constants(in);
  r.S = sc.S;
  r.C1 = sc.C1;
  r.C2 = sc.C2;
  const double m = log_derivative_bound(in.w);
  r.eta = 1.0 - m * m * (1.0 - in.epsilon);
  r.c_eps_delta = r.C1 / (r.eta * in.delta) + r.C2;
  r.lhs = weighted_l2_norm(in);
  r.pass = r.lhs <= r.c_eps_delta * (1.0 + opt.tol_disc);
  return r;
}

GaugeFields gauge_fields(const VerificationInput& in, double alpha) {
  in.validate();
  if (!(alpha >= 0.0)) throw InvalidArgument("alpha must be >= 0");
  const auto f0 = f0_values(in);
  const Grid& g = in.V.grid();
  GaugeFields out;
  out.alpha = alpha;
  std::vector<double> f(f0.size()), p(f0.size()), P(f0.size());
  for (std::size_t i = 0; i < f0.size(); ++i) {
    f[i] = alpha == 0.0 ? f0[i] : f0[i] / (1.0 + alpha * f0[i]);
    p[i] = in.w(f[i]);
    P[i] = p[i] * in.psi()[i];
  }
  out.f_alpha = GridField(g, std::move(f));
  out.phi_f = GridField(g, std::move(p));
  out.Phi_alpha = GridField(g, std::move(P));
  return out;
}

GridField apply_h_minus_e(const GridField& v, const GridField& psi, double E) {
  require_same_grid(v, psi, "apply_h_minus_e");
  const HamiltonianOp h(v);
  const auto x = h.restrict_field(psi);
  std::vector<double> hx(x.size());
  h.apply(x, hx);
  simd::axpy(-E, x, hx);
  return h.embed(hx);
}

Lemma1Result lemma1_inequality_check(const VerificationInput& in, double alpha,
                                     const VerifyOptions& opt) {
  in.validate();
  require_h2(in);
  const GaugeFields gf = gauge_fields(in, alpha);
  const GridField hme = apply_h_minus_e(in.V, in.psi(), in.E());
  const Grid& g = in.V.grid();
  const std::size_t n = g.size();
  const double E = in.E();
  const double m = log_derivative_bound(in.w);
  const double eta = 1.0 - m * m * (1.0 - in.epsilon);

  Lemma1Result r;
  r.alpha = alpha;
  auto Phi2 = [&](std::size_t i) { return gf.Phi_alpha[i] * gf.Phi_alpha[i]; };
  r.lhs = integrate(map_nodes(g, n, Phi2));
  r.orthogonality = integrate(map_nodes(g, n, [&](std::size_t i) {
    return gf.phi_f[i] * gf.phi_f[i] * in.psi()[i] * hme[i];
  }));
  const double phi2psi = std::sqrt(integrate(map_nodes(g, n, [&](std::size_t i) {
    const double t = gf.phi_f[i] * gf.phi_f[i] * in.psi()[i];
    return t * t;
  })));
  const double res = std::sqrt(integrate(map_nodes(g, n, [&](std::size_t i) { return hme[i] * hme[i]; })));
  r.orthogonality_bound = phi2psi * res;
  const double neg = integrate(map_nodes(g, n, [&](std::size_t i) {
    return Phi2(i) * std::max(E - in.V[i], 0.0);
  }));
  const double level = E + in.delta;
  const double allowed = integrate(map_nodes(g, n, [&](std::size_t i) {
    return in.V[i] <= level ? Phi2(i) : 0.0;
  }));
  r.rhs = (r.orthogonality + neg) / (eta * in.delta) + allowed;
  r.margin = r.rhs - r.lhs;
  r.pass = r.margin >= -opt.tol_disc * r.lhs;
  return r;
}

double Cutoff::value(double r) const {
  const double t = std::clamp(r - R, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

double Cutoff::dr(double r) const {
  const double t = r - R;
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 6.0 * t * (1.0 - t);
}

double Cutoff::drr(double r) const {
  const double t = r - R;
  if (t < 0.0 || t > 1.0) return 0.0;
  if (t == 0.0) return 3.0;
  if (t == 1.0) return -3.0;
  return 6.0 - 12.0 * t;
}

Lemma2Result lemma2_identity_check(const VerificationInput& in, double alpha, double R) {
  in.validate();
  if (!(R >= 0.0 || R <= -1.0)) {
    throw InvalidArgument("cutoff radius must be >= 0, or <= -1 for chi = 1 everywhere");
  }
  const Grid& g = in.V.grid();
  Lemma2Result out;
  out.alpha = alpha;
  out.R = R;
  out.degenerate = R <= -1.0 || R >= corner_radius(g);
  if (!out.degenerate && R + 1.0 > inscribed_radius(g)) {
    throw InvalidArgument("cutoff annulus [R, R+1] = [" + format_double(R) + ", " +
                          format_double(R + 1.0) + "] leaves the grid");
  }
  const Cutoff chi{R};
  const bool all_one = R <= -1.0;
  const GaugeFields gf = gauge_fields(in, alpha);
  const GridField hme = apply_h_minus_e(in.V, in.psi(), in.E());
  const auto dpsi = gradient(in.psi());
  const auto df = gradient(gf.f_alpha);
  const std::size_t n = g.size();

  std::vector<double> lhs(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point p = g.point(i);
    const double r = radius(p);
    const double c = all_one ? 1.0 : chi.value(r);
    double gx = 0.0, gy = 0.0, lap = 0.0;
    if (all_one) {
    } else if (r > 0.0) {
      const double d = chi.dr(r);
      gx = d * p.x / r;
      gy = d * p.y / r;
      lap = chi.drr(r) + (g.dim() == 2 ? d / r : 0.0);
    } else if (g.dim() == 1) {
      lap = chi.drr(r);
    }
    const double psi = in.psi()[i];
    const double phi2 = gf.phi_f[i] * gf.phi_f[i];
    double grad_chi_psi = gx * dpsi[0][i];
    double grad_chi_f = gx * df[0][i];
    if (g.dim() == 2) {
      grad_chi_psi += gy * dpsi[1][i];
      grad_chi_f += gy * df[1][i];
    }
    lhs[i] = c * phi2 * psi * (c * hme[i] - lap * psi - 2.0 * grad_chi_psi);
    const double f = gf.f_alpha[i];
    const double logd = in.w.derivative(f) / in.w(f);
    const double xi = gx * gx + gy * gy + 2.0 * c * logd * grad_chi_f;
    rhs[i] = xi * phi2 * psi * psi;
  }
  out.lhs = integrate(GridField(g, std::move(lhs)));
  out.rhs = integrate(GridField(g, std::move(rhs)));
  out.abs_error = std::fabs(out.lhs - out.rhs);
  const double psi2 = integrate(map_nodes(g, n, [&](std::size_t i) { return in.psi()[i] * in.psi()[i]; }));
  out.rel_error = out.abs_error / std::max(std::fabs(out.rhs), 1e-14 * psi2);
  return out;
}

double theorem2_min_radius(const Weight& w) { return unit_log_derivative_onset(w); }

Theorem2Result theorem2_bound(const VerificationInput& in, double R, const VerifyOptions& opt) {
  in.validate();
  if (!check_admissible(in.w).log_derivative_vanishes) {
    throw InvalidArgument("weight " + in.w.describe() +
                          " has a log-derivative that does not vanish at infinity");
  }
  const double rmin = theorem2_min_radius(in.w);
  if (!(R >= rmin)) {
    throw InvalidArgument("cutoff radius R = " + format_double(R) + " is below " +
                          format_double(rmin) + ", where sup_{t>R} |phi'/phi| <= 1 starts");
  }
  const Grid& g = in.V.grid();
  if (R + 1.0 > inscribed_radius(g)) {
    throw InvalidArgument("cutoff annulus [R, R+1] leaves the grid");
  }
  Theorem2Result r;
  r.R = R;
  const auto sc = s_constants(in);
  r.S = sc.S;
  r.C1 = sc.C1;
  r.C2 = sc.C2;
  const auto f0 = f0_values(in);
  const GridField f0f(g, f0);
  const auto df = gradient(f0f);
  const Cutoff chi{R};
  const std::size_t n = g.size();
  double annulus = 0.0;
  double ball = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double rad = radius(g.point(i));
    const double p = in.w(f0[i]);
    if (rad <= R + 1.0) ball = std::max(ball, p * p);
    if (rad >= R && rad <= R + 1.0) {
      const double gc = std::fabs(chi.dr(rad));
      double gf2 = df[0][i] * df[0][i];
      if (g.dim() == 2) gf2 += df[1][i] * df[1][i];
      annulus = std::max(annulus, (gc * gc + 2.0 * gc * std::sqrt(gf2)) * p * p);
    }
  }
  const double psi2 =
      integrate(map_nodes(g, n, [&](std::size_t i) { return in.psi()[i] * in.psi()[i]; }));
  const double ed = in.epsilon * in.delta;
  r.annulus_sup = annulus;
  r.a_eps_delta = psi2 / ed * annulus + r.C1 / ed + r.C2;
  r.ball_sup_term = psi2 * ball;
  r.total_bound = r.ball_sup_term + r.a_eps_delta + r.C2;
  r.lhs = weighted_l2_norm(in);
  r.pass = r.lhs <= r.total_bound * (1.0 + opt.tol_disc);
  return r;
}

EnvelopeResult pointwise_envelope(const VerificationInput& in, const VerifyOptions& opt) {
  in.validate();
  const Grid& g = in.V.grid();
  const auto f0 = f0_values(in);
  const std::size_t n = g.size();
  EnvelopeResult r;
  for (std::size_t i = 0; i < n; ++i) {
    r.C_eps = std::max(r.C_eps, std::fabs(in.psi()[i]) * in.w(f0[i]));
  }

  const auto tw = trapezoid_weights(g);
  std::vector<std::vector<double>> axis_centers(static_cast<std::size_t>(g.dim()));
  for (int a = 0; a < g.dim(); ++a) {
    const auto& b = g.bounds(a);
    const auto count = static_cast<std::size_t>(std::floor(b.length() / 0.5 + 1e-9));
    for (std::size_t k = 0; k <= count; ++k) axis_centers[a].push_back(b.lo + 0.5 * k);
  }
  auto visit = [&](const Point& c) {
    double peak = 0.0;
    for_each_in_ball(g, c, 0.5, [&](std::size_t i) { peak = std::max(peak, std::fabs(in.psi()[i])); });
    double l2 = 0.0;
    for_each_in_ball(g, c, 1.0, [&](std::size_t i) { l2 += tw[i] * in.psi()[i] * in.psi()[i]; });
    ++r.balls;
    if (l2 > 0.0) r.C_EV = std::max(r.C_EV, peak / std::sqrt(l2));
  };
  if (g.dim() == 1) {
    for (double x : axis_centers[0]) visit(Point{x, 0.0});
  } else {
    for (double x : axis_centers[0]) {
      for (double y : axis_centers[1]) visit(Point{x, y});
    }
  }
  const auto vals = in.V.values();
  const double vmax = *std::max_element(vals.begin(), vals.end());
  r.lipschitz_c = std::sqrt(std::max(vmax - in.E(), 0.0));
  r.ball_factor = std::exp(2.0 * log_derivative_bound(in.w) * (1.0 - in.epsilon) * r.lipschitz_c);
  r.theory_bound = r.C_EV * r.ball_factor * std::sqrt(weighted_l2_norm(in));
  r.pass = r.C_eps <= r.theory_bound * (1.0 + opt.tol_disc);
  return r;
}

BallRatioResult ball_ratio_bound_check(const VerificationInput& in, int n_centers,
                                       const VerifyOptions& opt) {
  in.validate();
  if (n_centers < 1) throw InvalidArgument("ball_ratio_bound_check needs n_centers >= 1");
  const Grid& g = in.V.grid();
  const auto f0 = f0_values(in);
  const auto vals = in.V.values();
  const double vmax = *std::max_element(vals.begin(), vals.end());
  const double c = std::sqrt(std::max(vmax - in.E(), 0.0));
  BallRatioResult r;
  r.bound = std::exp(2.0 * log_derivative_bound(in.w) * (1.0 - in.epsilon) * c);

  auto spaced = [](double lo, double hi, int k) {
    std::vector<double> out;
    if (k == 1) {
      out.push_back(0.5 * (lo + hi));
      return out;
    }
    for (int i = 0; i < k; ++i) out.push_back(lo + (hi - lo) * i / (k - 1));
    return out;
  };
  std::vector<Point> centers;
  if (g.dim() == 1) {
    for (double x : spaced(g.bounds(0).lo + 1.0, g.bounds(0).hi - 1.0, n_centers)) {
      centers.push_back({x, 0.0});
    }
  } else {
    const int k = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_centers))));
    for (double x : spaced(g.bounds(0).lo + 1.0, g.bounds(0).hi - 1.0, k)) {
      for (double y : spaced(g.bounds(1).lo + 1.0, g.bounds(1).hi - 1.0, k)) centers.push_back({x, y});
    }
  }
  for (const Point& p : centers) {
    if (!ball_inside(g, p, 1.0)) {
      ++r.skipped;
      continue;
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for_each_in_ball(g, p, 1.0, [&](std::size_t i) {
      lo = std::min(lo, f0[i]);
      hi = std::max(hi, f0[i]);
    });
    ++r.centers;
    const double ratio = in.w(hi) / in.w(lo);
    r.max_ratio = std::max(r.max_ratio, ratio);
    if (ratio > r.bound * (1.0 + opt.tol_disc)) ++r.violations;
  }
  r.worst_slack = r.max_ratio / r.bound - 1.0;
  r.pass = r.centers > 0 && r.violations == 0;
  return r;
}

SummabilityResult summability_bounds_1d(const IntervalDecomposition& decomp,
                                        const AgmonField& rho, const Weight& w, double epsilon) {
  const Grid& g = decomp.grid;
  if (!(g == rho.rho.grid())) throw InvalidArgument("decomposition and rho live on different grids");
  if (g.dim() != 1) throw InvalidArgument("summability_bounds_1d needs a 1D grid");
  const double h = g.h(0);
  const std::size_t n = g.n(0);
  auto phi2 = [&](std::size_t i) {
    const double p = w((1.0 - epsilon) * rho.rho[i]);
    return p * p;
  };
  auto node_weight = [&](std::size_t i, bool right_side) {
    if (i == decomp.origin) {
      if (right_side) return decomp.origin + 1 < n ? 0.5 * h : 0.0;
      return decomp.origin > 0 ? 0.5 * h : 0.0;
    }
    return (i == 0 || i + 1 == n) ? 0.5 * h : h;
  };
  auto family = [&](const std::vector<NodeInterval>& ivs, bool right_side) {
    FamilySums s;
    for (const auto& iv : ivs) {
      const double len = iv.b - iv.a;
      const double near = right_side ? phi2(iv.first) : phi2(iv.last);
      const double far = right_side ? phi2(iv.last) : phi2(iv.first);
      s.lower += near * len;
      s.upper += far * len;
      double inner = 0.0;
      for (std::size_t i = iv.first; i <= iv.last; ++i) {
        const double p = phi2(i);
        inner += (i == iv.first || i == iv.last) ? 0.5 * p : p;
        s.half_line += node_weight(i, right_side) * p;
      }
      if (iv.first == iv.last) inner = 0.0;
      s.restricted += h * inner;
      s.cell_slack += h * far;
    }
    return s;
  };
  SummabilityResult r;
  r.right = family(decomp.right, true);
  r.left = family(decomp.left, false);
  auto ok = [](const FamilySums& s) {
    const double tiny = 1e-12 * std::max(1.0, s.upper);
    return s.lower <= s.restricted + tiny && s.restricted <= s.upper + tiny &&
           s.lower - s.cell_slack - tiny <= s.half_line && s.half_line <= s.upper + s.cell_slack + tiny;
  };
  r.pass = ok(r.right) && ok(r.left);
  return r;
}

}  // namespace agmonkit
