#include "agmonkit/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "agmonkit/error.hpp"
#include "agmonkit/field_io.hpp"
#include "agmonkit/verify.hpp"

namespace agmonkit {
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "agmonkit 1.0.0";

double num(const Json& j, const char* key) {
  if (!j.contains(key)) throw InvalidArgument(std::string("missing key '") + key + "'");
  const Json& v = j.at(key);
  if (!v.is_number()) throw InvalidArgument(std::string("key '") + key + "' must be a number");
  return v.get<double>();
}

double num_or(const Json& j, const char* key, double fallback) {
  return j.contains(key) ? num(j, key) : fallback;
}

Point point_or_origin(const Json& j) {
  if (!j.contains("center")) return {};
  const auto c = j.at("center").get<std::vector<double>>();
  if (c.empty() || c.size() > 2) throw InvalidArgument("center needs one or two coordinates");
  return {c[0], c.size() > 1 ? c[1] : 0.0};
}

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw InvalidArgument("unknown key '" + k + "' in " + where);
  }
}

Grid parse_grid(const Json& j) {
  reject_unknown(j, {"dim", "bounds", "n"}, "grid");
  const auto b = j.at("bounds").get<std::vector<std::vector<double>>>();
  const auto n = j.at("n").get<std::vector<std::size_t>>();
  const int dim = j.contains("dim") ? j.at("dim").get<int>() : static_cast<int>(b.size());
  std::vector<Interval> bounds;
  for (const auto& ab : b) {
    if (ab.size() != 2) throw InvalidArgument("each grid bound needs [lo, hi]");
    bounds.push_back({ab[0], ab[1]});
  }
  if (bounds.size() != static_cast<std::size_t>(dim) || n.size() != static_cast<std::size_t>(dim)) {
    throw InvalidArgument("grid bounds and n must have one entry per dimension");
  }
  return make_grid(dim, bounds, n);
}

double inscribed(const Grid& g) {
  double r = 1e300;
  for (int a = 0; a < g.dim(); ++a) r = std::min({r, -g.bounds(a).lo, g.bounds(a).hi});
  return r;
}

void write_text(const fs::path& p, const std::string& text, std::vector<fs::path>& created) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write " + p.string());
  created.push_back(p);
  os << text;
  if (!os) throw Error("write failed: " + p.string());
}

template <typename F>
std::string render(F&& f) {
  std::ostringstream os;
  f(os);
  return os.str();
}

struct StageError : Error {
  using Error::Error;
};

template <typename F>
auto stage(const Scenario& s, const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("scenario '" + s.id + "', stage '" + name + "': " + e.what() +
                     "\nconfig: " + s.config.dump());
  }
}

}  // namespace

std::string track_name(Track t) {
  switch (t) {
    case Track::H2: return "H2";
    case Track::H3: return "H3";
    case Track::both: return "both";
  }
  return "?";
}

Weight parse_weight(const Json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "power") {
    reject_unknown(j, {"family", "r"}, "weight");
    return Weight::power(num(j, "r"));
  }
  if (family == "exp" || family == "exponential") {
    reject_unknown(j, {"family", "a"}, "weight");
    return Weight::exponential(num(j, "a"));
  }
  throw InvalidArgument("unknown weight family '" + family + "' (power or exp)");
}

PotentialSpec parse_potential(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    reject_unknown(j, {"kind", "value"}, "potential");
    return PotentialSpec::constant(num(j, "value"));
  }
  if (kind == "harmonic") {
    reject_unknown(j, {"kind", "k", "center"}, "potential");
    return PotentialSpec::harmonic(num_or(j, "k", 1.0), point_or_origin(j));
  }
  if (kind == "square_well") {
    reject_unknown(j, {"kind", "depth", "half_width", "center"}, "potential");
    return PotentialSpec::square_well(num(j, "depth"), num(j, "half_width"), point_or_origin(j));
  }
  if (kind == "gaussian_well") {
    reject_unknown(j, {"kind", "depth", "width", "center"}, "potential");
    return PotentialSpec::gaussian_well(num(j, "depth"), num(j, "width"), point_or_origin(j));
  }
  if (kind == "piecewise_linear") {
    reject_unknown(j, {"kind", "knots", "values"}, "potential");
    return PotentialSpec::piecewise_linear(j.at("knots").get<std::vector<double>>(),
                                           j.at("values").get<std::vector<double>>());
  }
  if (kind == "spiky") throw InvalidArgument("spiky potentials are built through build_potential");
  throw InvalidArgument("unknown potential kind '" + kind + "'");
}

Scenario parse_scenario(const Json& j) {
  if (!j.is_object()) throw InvalidArgument("scenario must be a JSON object");
  reject_unknown(j,
                 {"id", "grid", "potential", "weight", "epsilon", "delta", "alphas", "R", "track",
                  "eigen", "agmon", "checks", "output"},
                 "scenario");
  Scenario s;
  s.config = j;
  s.id = j.value("id", std::string("scenario"));
  if (s.id.empty() || s.id.find_first_of("/\\") != std::string::npos) {
    throw InvalidArgument("scenario id must be non-empty and contain no path separators");
  }
  s.grid = parse_grid(j.at("grid"));
  s.potential = j.at("potential");
  s.weight = parse_weight(j.at("weight"));
  s.epsilon = num(j, "epsilon");
  if (!(s.epsilon > 0.0 && s.epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0, 1)");

  if (j.contains("delta")) {
    const Json& d = j.at("delta");
    if (d.is_string()) {
      if (d.get<std::string>() != "auto") throw InvalidArgument("delta must be a number or \"auto\"");
    } else {
      s.delta = d.get<double>();
      if (!(*s.delta > 0.0)) throw InvalidArgument("delta must be > 0");
    }
  } else {
    throw InvalidArgument("missing key 'delta' (a number, or \"auto\" for spiky potentials)");
  }
  if (j.contains("alphas")) s.alphas = j.at("alphas").get<std::vector<double>>();
  if (s.alphas.empty()) throw InvalidArgument("alphas must not be empty");
  for (double a : s.alphas) {
    if (!(a >= 0.0)) throw InvalidArgument("alphas must be >= 0");
  }
  if (j.contains("R") && !j.at("R").is_string()) s.cutoff_R = j.at("R").get<double>();

  const std::string track = j.value("track", std::string("H2"));
  if (track == "H2") s.track = Track::H2;
  else if (track == "H3") s.track = Track::H3;
  else if (track == "both") s.track = Track::both;
  else throw InvalidArgument("track must be H2, H3 or both");

  if (j.contains("eigen")) {
    const Json& e = j.at("eigen");
    reject_unknown(e, {"k", "index", "tol"}, "eigen");
    s.eigen_k = e.value("k", 1);
    s.eigen_index = e.value("index", 0);
    s.eigen_tol = e.value("tol", 1e-9);
    if (s.eigen_index < 0 || s.eigen_index >= s.eigen_k) {
      throw InvalidArgument("eigen.index must lie in [0, eigen.k)");
    }
  }
  const std::string agmon = j.value("agmon", std::string("auto"));
  if (agmon == "auto") s.agmon = AgmonChoice::automatic;
  else if (agmon == "quadrature") s.agmon = AgmonChoice::quadrature;
  else if (agmon == "fast_marching") s.agmon = AgmonChoice::fast_marching;
  else throw InvalidArgument("agmon must be auto, quadrature or fast_marching");

  if (j.contains("checks")) {
    const Json& c = j.at("checks");
    reject_unknown(c, {"ball_centers", "shells", "lemma2_alpha", "lemma2_tol", "refinement_study"},
                   "checks");
    s.ball_centers = c.value("ball_centers", 50);
    s.shells = c.value("shells", 8);
    s.lemma2_alpha = c.value("lemma2_alpha", 0.1);
    s.lemma2_tol = c.value("lemma2_tol", 5e-3);
    s.refinement_study = c.value("refinement_study", false);
  }
  s.output = j.value("output", "out/" + s.id);

  const std::string kind = s.potential.at("kind").get<std::string>();
  if (kind == "spiky") {
    if (s.potential.contains("construction_weight")) {
      s.construction_weight = parse_weight(s.potential.at("construction_weight"));
    }
  } else {
    parse_potential(s.potential);
    if (!s.delta) throw InvalidArgument("delta \"auto\" needs a spiky potential with level E0");
  }

  if (s.track != Track::H3) {
    const double thr = epsilon_threshold(s.weight);
    if (!(s.epsilon > thr)) {
      throw ThresholdError("track " + track_name(s.track) + " needs epsilon > max{0, 1 - M_phi^-2} = " +
                               format_double(thr) + " for " + s.weight.describe() +
                               "; got epsilon = " + format_double(s.epsilon),
                           thr);
    }
  }
  if (s.track != Track::H2 && !check_admissible(s.weight).log_derivative_vanishes) {
    throw InvalidArgument("track " + track_name(s.track) + " needs phi'/phi -> 0, which " +
                          s.weight.describe() + " fails");
  }
  return s;
}

Json load_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  try {
    return Json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

Scenario load_scenario(const fs::path& path) { return parse_scenario(load_json(path)); }

BuiltPotential build_potential(const Scenario& s) {
  const Json& p = s.potential;
  if (p.at("kind").get<std::string>() != "spiky") return {parse_potential(p), std::nullopt};
  reject_unknown(p, {"kind", "base", "E0", "J", "center_rule", "l_max", "R", "construction_weight"},
                 "spiky potential");
  const PotentialSpec base = parse_potential(p.at("base"));
  const double E0 = num(p, "E0");
  const auto J = p.at("J").get<std::size_t>();
  const Json& cr = p.at("center_rule");
  const CenterRule rule{num(cr, "c0"), num(cr, "sigma")};
  SpikyOptions opt;
  opt.l_max = num_or(p, "l_max", 0.5);
  const double extent = std::max(std::fabs(s.grid.bounds(0).lo), std::fabs(s.grid.bounds(0).hi));
  if (p.contains("R") && !p.at("R").is_string()) {
    opt.R = num(p, "R");
  } else {
    opt.R = 2.0 * sublevel_half_width(base, E0, extent);
  }
  opt.box_hi = s.grid.bounds(0).hi;
  const Weight& cw = s.construction_weight ? *s.construction_weight : s.weight;
  auto ex = build_spiky_example(base, E0, cw, J, rule, opt);
  return {ex.potential, ex.spec};
}

Scenario refined(const Scenario& s) {
  Scenario r = s;
  r.grid = refine(s.grid);
  return r;
}

std::vector<EigenPair> solve_scenario(const Scenario& s, const GridField& v) {
  return lowest_eigenpairs(assemble_hamiltonian(v), s.eigen_k, s.eigen_tol);
}

AgmonField agmon_for(const Scenario& s, const GridField& v, double E) {
  const bool quad = s.agmon == AgmonChoice::quadrature ||
                    (s.agmon == AgmonChoice::automatic && v.grid().dim() == 1);
  if (quad) return agmon_1d(v, E);
  return agmon_fast_march(v, E);
}

Json spiky_to_json(const SpikySpec& s) {
  Json j = Json::object();
  j["base"] = s.base.kind_name();
  j["E0"] = s.E0;
  j["R"] = s.R;
  j["floor"] = s.floor;
  j["l_max"] = s.l_max;
  j["requested"] = s.requested;
  j["kept"] = s.centers.size();
  j["dropped_tail_bound"] = s.dropped_tail_bound;
  j["V1_l2_sq_bound"] = spike_l2_bound(s);
  Json spikes = Json::array();
  for (std::size_t k = 0; k < s.centers.size(); ++k) {
    spikes.push_back(Json{{"c", s.centers[k]}, {"l", s.widths[k]}});
  }
  j["spikes"] = spikes;
  return j;
}

namespace {

double auto_cutoff(const Scenario& s) {
  if (s.cutoff_R) return *s.cutoff_R;
  const Grid& g = s.grid;
  const double rin = inscribed(g);
  const double h = g.h_max();
  double R = std::floor(0.5 * rin / h) * h;
  R = std::max(R, theorem2_min_radius(s.weight));
  if (R + 1.0 > rin) R = rin - 1.0;
  return R;
}

struct Checks {
  DecayReport& rep;
  const Scenario& s;
  const VerificationInput& in;
  VerifyOptions vo;
};

void run_checks(Checks c, const std::optional<SpikySpec>& spiky, double E0) {
  DecayReport& rep = c.rep;
  const Scenario& s = c.s;
  const VerificationInput& in = c.in;
  const Grid& g = in.V.grid();

  // Agmon distance properties.
  const double eik = check_eikonal(in.rho, in.V, in.E());
  rep.set("eikonal_violation", eik);
  if (g.dim() == 1) {
    const AgmonField fm = agmon_fast_march(in.V, in.E());
    const AgmonField q = agmon_1d(in.V, in.E());
    double d = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) d = std::max(d, std::fabs(fm.rho[i] - q.rho[i]));
    rep.set("agmon_fm_vs_quadrature", d);
  }
  double rho_min = 1e300;
  for (double r : in.rho.rho.values()) rho_min = std::min(rho_min, r);
  rep.verdict("rho_nonnegative", rho_min >= 0.0 && in.rho.rho[in.rho.source] == 0.0);
  if (spiky) {
    const double root = std::sqrt(std::fabs(spiky->floor));
    std::size_t bad = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double bound = root * std::fabs(g.point(i).x);
      if (in.rho.rho[i] > bound * (1.0 + 1e-12) + 1e-300) ++bad;
    }
    rep.set("rho_upper_bound_violations", static_cast<double>(bad));
    rep.verdict("rho_upper_bound", bad == 0);
  }
  {
    const auto sh = check_rho_to_infinity(in.rho, s.shells);
    Json j = Json::object();
    j["label"] = ShellDiagnostic::label;
    j["inner_radius"] = sh.inner_radius;
    j["minima"] = sh.minima;
    j["strictly_increasing"] = sh.strictly_increasing;
    rep.details["rho_shells"] = j;
  }

  // Integrability constant and weighted norm.
  const double S = integrability_constant(in);
  const double wl2 = weighted_l2_norm(in);
  rep.set("S", S);
  rep.set("weighted_l2", wl2);

  const double thr = epsilon_threshold(in.w);
  if (s.track != Track::H3) {
    const auto t1 = theorem1_bound(in, c.vo);
    rep.set("C1", t1.C1);
    rep.set("C2", t1.C2);
    rep.set("eta_eps", t1.eta);
    rep.set("c_eps_delta", t1.c_eps_delta);
    rep.verdict("theorem1", t1.pass);

    double margin = 1e300;
    bool orth_ok = true;
    Json per = Json::array();
    bool l1 = true;
    for (double a : s.alphas) {
      const auto r = lemma1_inequality_check(in, a, c.vo);
      margin = std::min(margin, r.margin);
      l1 = l1 && r.pass;
      orth_ok = orth_ok && std::fabs(r.orthogonality) <= r.orthogonality_bound * (1.0 + 1e-9) + 1e-300;
      per.push_back(Json{{"alpha", a}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"margin", r.margin},
                         {"orthogonality", r.orthogonality},
                         {"orthogonality_bound", r.orthogonality_bound}});
    }
    rep.set("lemma1_margin", margin);
    rep.verdict("lemma1", l1);
    rep.verdict("orthogonality_identity", orth_ok);
    rep.details["lemma1"] = per;
  }
  if (s.track != Track::H2) {
    if (!(s.epsilon > thr)) {
      bool refused = false;
      try {
        theorem1_bound(in, c.vo);
      } catch (const ThresholdError&) {
        refused = true;
      }
      rep.verdict("theorem1_refused_below_threshold", refused);
    }
    const double R = auto_cutoff(s);
    const auto t2 = theorem2_bound(in, R, c.vo);
    rep.set("cutoff_R", R);
    if (s.track == Track::H3) {
      rep.set("C1", t2.C1);
      rep.set("C2", t2.C2);
    }
    rep.set("a_eps_delta", t2.a_eps_delta);
    rep.set("theorem2_ball_sup_term", t2.ball_sup_term);
    rep.set("theorem2_total_bound", t2.total_bound);
    rep.verdict("theorem2", t2.pass);
  }

  // Gauge limit alpha -> 0.
  {
    std::vector<double> alphas = s.alphas;
    std::sort(alphas.begin(), alphas.end(), std::greater<>());
    Json per = Json::array();
    double prev = -1.0;
    bool mono = true;
    double last = 0.0;
    for (double a : alphas) {
      const auto gf = gauge_fields(in, a);
      std::vector<double> sq(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) sq[i] = gf.Phi_alpha[i] * gf.Phi_alpha[i];
      const double nrm = integrate(GridField(g, std::move(sq)));
      if (nrm < prev * (1.0 - 1e-14)) mono = false;
      prev = nrm;
      last = nrm;
      per.push_back(Json{{"alpha", a}, {"Phi_norm2", nrm}});
    }
    rep.details["gauge"] = per;
    rep.set("gauge_norm2_smallest_alpha", last);
    rep.set("gauge_gap_smallest_alpha", std::fabs(wl2 - last) / wl2);
    rep.verdict("gauge_monotone", mono);
  }

  // Lemma 2 identity.
  {
    const double R = auto_cutoff(s);
    const auto l2 = lemma2_identity_check(in, s.lemma2_alpha, R);
    rep.set("lemma2_R", R);
    rep.set("lemma2_lhs", l2.lhs);
    rep.set("lemma2_rhs", l2.rhs);
    rep.set("lemma2_rel_error", l2.rel_error);
    rep.verdict("lemma2", l2.rel_error <= s.lemma2_tol);
  }

  // Pointwise envelope and ball ratios.
  {
    const auto env = pointwise_envelope(in, c.vo);
    rep.set("C_eps_envelope", env.C_eps);
    rep.set("C_EV_fit", env.C_EV);
    rep.set("envelope_theory_bound", env.theory_bound);
    rep.verdict("envelope", env.pass);
    const auto br = ball_ratio_bound_check(in, s.ball_centers, c.vo);
    rep.set("ball_ratio_bound", br.bound);
    rep.set("ball_ratio_max", br.max_ratio);
    rep.set("ball_ratio_slack", br.worst_slack);
    rep.set("ball_ratio_centers", static_cast<double>(br.centers));
    rep.set("ball_ratio_violations", static_cast<double>(br.violations));
    rep.verdict("ball_ratio", br.pass);
  }

  // Interval sandwich (1D).
  if (g.dim() == 1) {
    const auto ind = sublevel_indicator(in.V, in.E() + in.delta);
    const auto dec = interval_decomposition_1d(ind);
    const auto sb = summability_bounds_1d(dec, in.rho, in.w, in.epsilon);
    rep.set("summability_lo", sb.right.lower + sb.left.lower);
    rep.set("summability_hi", sb.right.upper + sb.left.upper);
    rep.set("summability_S_restricted", sb.right.restricted + sb.left.restricted);
    rep.set("summability_intervals", static_cast<double>(dec.right.size() + dec.left.size()));
    rep.verdict("summability", sb.pass);
  }

  // Persson perturbation.
  {
    const auto p = persson_gap_check(in.V, E0, in.delta);
    rep.set("persson_level", p.level);
    rep.set("persson_sup_W", p.sup_W);
    rep.set("persson_measure_A", p.measure_A);
    rep.set("persson_l2_W", p.l2_norm_W);
    rep.set("persson_l2_bound", p.l2_bound);
    rep.set("persson_l2_bound_unrooted", p.l2_bound_unrooted);
    rep.verdict("persson_floor", p.floor_ok && p.range_ok);
    rep.verdict("persson_bound", p.bound_ok);
  }
}

}  // namespace

DecayReport verify_scenario(const Scenario& s, const GridField& V, const std::vector<EigenPair>& pairs,
                            const AgmonField& rho, const std::optional<SpikySpec>& spiky,
                            double tol_scale) {
  DecayReport rep;
  rep.id = s.id;
  rep.provenance["version"] = kVersion;
  rep.provenance["tol_scale"] = tol_scale;
  rep.provenance["config"] = s.config;
  const EigenPair& pair = pairs.at(static_cast<std::size_t>(s.eigen_index));
  const double E = pair.E;
  if (!(rho.E == E)) throw InvalidArgument("rho was computed for a different energy");

  const double E0 = spiky ? spiky->E0 : E;
  const double delta = stage(s, "verify", [&] {
    if (s.delta) return *s.delta;
    if (!spiky) throw InvalidArgument("delta \"auto\" needs a spiky potential");
    if (!(E < spiky->E0)) {
      throw InvalidArgument("eigenvalue E = " + format_double(E) + " is not below E0 = " +
                            format_double(spiky->E0));
    }
    return 0.5 * (spiky->E0 - E);
  });

  rep.set("E", E);
  rep.set("residual", pair.residual);
  for (std::size_t k = 0; k < pairs.size(); ++k) rep.set("E_" + std::to_string(k), pairs[k].E);
  rep.set("m_V", infimum(V));
  rep.set("psi_inf", sup_norm(pair.psi));
  rep.set("epsilon", s.epsilon);
  rep.set("epsilon_threshold", epsilon_threshold(s.weight));
  rep.set("M_phi", log_derivative_bound(s.weight));
  rep.set("delta", delta);
  rep.set("h", V.grid().h_max());
  rep.set("origin_snap", rho.snap_distance);
  rep.details["track"] = track_name(s.track);
  rep.details["weight"] = s.weight.describe();
  rep.details["agmon_method"] = method_name(rho.method);
  if (spiky) {
    rep.details["spiky"] = spiky_to_json(*spiky);
    const Weight& cw = s.construction_weight ? *s.construction_weight : s.weight;
    rep.set("spike_series_partial_sum", spike_series_partial_sum(*spiky, cw, spiky->centers.size()));
    rep.set("spike_tail_bound", spiky->dropped_tail_bound);
    rep.set("V1_l2_sq_bound", spike_l2_bound(*spiky));
  }

  VerificationInput in{V, pair, rho, s.weight, s.epsilon, delta};
  stage(s, "verify", [&] {
    run_checks(Checks{rep, s, in, VerifyOptions{1e-2 * tol_scale}}, spiky, E0);
    return 0;
  });

  if (s.refinement_study) {
    stage(s, "refinement", [&] {
      const Scenario fine = refined(s);
      const BuiltPotential fp = build_potential(fine);
      const GridField Vf = sample(fp.spec, fine.grid);
      const auto pf = solve_scenario(fine, Vf);
      const EigenPair& pfine = pf.at(static_cast<std::size_t>(s.eigen_index));
      const AgmonField rf = agmon_for(fine, Vf, pfine.E);
      const double eik = check_eikonal(rf, Vf, pfine.E);
      rep.set("eikonal_violation_refined", eik);
      rep.set("eikonal_ratio", rep.constant("eikonal_violation") / eik);
      VerificationInput fin{Vf, pfine, rf, s.weight, s.epsilon, delta};
      const auto l2 = lemma2_identity_check(fin, s.lemma2_alpha, rep.constant("lemma2_R"));
      rep.set("lemma2_rel_error_refined", l2.rel_error);
      rep.set("lemma2_ratio", rep.constant("lemma2_rel_error") / l2.rel_error);
      return 0;
    });
  }
  return rep;
}

ScenarioResult run_scenario(const Scenario& s, const RunOptions& opt) {
  ScenarioResult res;
  const BuiltPotential bp = stage(s, "potential", [&] { return build_potential(s); });
  res.spiky = bp.spiky;
  res.V = stage(s, "potential", [&] { return sample(bp.spec, s.grid); });
  res.pairs = stage(s, "solve", [&] { return solve_scenario(s, res.V); });
  res.pair = res.pairs.at(static_cast<std::size_t>(s.eigen_index));
  const double E = res.pair.E;
  res.rho = stage(s, "agmon", [&] { return agmon_for(s, res.V, E); });
  res.report = verify_scenario(s, res.V, res.pairs, res.rho, res.spiky, opt.tol_scale);
  const DecayReport& rep = res.report;

  if (!opt.write_artifacts) return res;

  const fs::path out = opt.out ? fs::path(*opt.out) : fs::path(s.output);
  std::vector<fs::path> created;
  std::vector<fs::path> made_dirs;
  try {
    for (const fs::path& d : {out, out / "fields", out / "plots"}) {
      if (!fs::exists(d)) {
        fs::create_directories(d);
        made_dirs.push_back(d);
      }
    }
    write_text(out / "report.json", render([&](std::ostream& os) { write_report_json(os, rep.to_json()); }),
               created);
    write_text(out / "constants.csv", render([&](std::ostream& os) { write_constants_csv(os, rep); }),
               created);
    write_text(out / "fields" / "V.csv", render([&](std::ostream& os) { write_field_csv(os, res.V); }),
               created);
    for (std::size_t k = 0; k < res.pairs.size(); ++k) {
      const auto& p = res.pairs[k];
      write_text(out / "fields" / ("psi_" + std::to_string(k) + ".csv"),
                 render([&](std::ostream& os) {
                   write_field_csv(os, p.psi,
                                   {{"E", format_double(p.E)}, {"residual", format_double(p.residual)}});
                 }),
                 created);
    }
    write_text(out / "fields" / "rho.csv", render([&](std::ostream& os) {
                 write_field_csv(os, res.rho.rho,
                                 {{"method", method_name(res.rho.method)}, {"E", format_double(E)}});
               }),
               created);
    const double Ceps = rep.constant("C_eps_envelope");
    std::vector<double> env(s.grid.size()), abspsi(s.grid.size());
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
      env[i] = Ceps / s.weight((1.0 - s.epsilon) * res.rho.rho[i]);
      abspsi[i] = std::fabs(res.pair.psi[i]);
    }
    auto plot = [&](const char* name, const GridField& f, const std::string& title) {
      write_text(out / "plots" / name, render([&](std::ostream& os) { write_plot_dat(os, f, title); }),
                 created);
    };
    plot("V.dat", res.V, "V");
    plot("psi.dat", res.pair.psi, "psi, E = " + format_double(E));
    plot("abs_psi.dat", GridField(s.grid, std::move(abspsi)), "|psi| samples");
    plot("rho.dat", res.rho.rho, "rho_E (" + method_name(res.rho.method) + ")");
    plot("envelope.dat", GridField(s.grid, std::move(env)), "C_eps / phi((1-eps) rho)");
  } catch (const std::exception& e) {
    std::error_code ec;
    for (const auto& p : created) fs::remove(p, ec);
    for (auto it = made_dirs.rbegin(); it != made_dirs.rend(); ++it) fs::remove(*it, ec);
    throw StageError("scenario '" + s.id + "', stage 'write': " + e.what());
  }
  return res;
}

// ---------------------------------------------------------------------------

namespace {

void set_path(Json& j, const std::string& dotted, const Json& value) {
  Json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw InvalidArgument("bad parameter path '" + dotted + "'");
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    if (!cur->contains(key)) (*cur)[key] = Json::object();
    cur = &(*cur)[key];
    start = dot + 1;
  }
}

Json resolve_entry(const Json& e, const fs::path& base_dir) {
  if (e.is_string()) return load_json(base_dir / e.get<std::string>());
  if (e.is_object()) return e;
  throw InvalidArgument("sweep entries must be file names or scenario objects");
}

}  // namespace

SweepPlan parse_sweep(const Json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw InvalidArgument("sweep must be a JSON object");
  reject_unknown(j, {"id", "scenarios", "grid"}, "sweep");
  SweepPlan plan;
  plan.id = j.value("id", std::string("sweep"));
  if (j.contains("scenarios")) {
    for (const auto& e : j.at("scenarios")) plan.scenarios.push_back(parse_scenario(resolve_entry(e, base_dir)));
  }
  if (j.contains("grid")) {
    const Json& g = j.at("grid");
    reject_unknown(g, {"base", "params"}, "sweep grid");
    const Json base = resolve_entry(g.at("base"), base_dir);
    const Json& params = g.at("params");
    std::vector<std::pair<std::string, std::vector<Json>>> axes;
    for (const auto& [k, v] : params.items()) {
      if (!v.is_array() || v.empty()) throw InvalidArgument("sweep parameter '" + k + "' needs a non-empty list");
      axes.emplace_back(k, std::vector<Json>(v.begin(), v.end()));
    }
    if (axes.empty()) throw InvalidArgument("sweep grid has no parameters");
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
      Json doc = base;
      std::string id = base.value("id", std::string("scenario"));
      for (std::size_t a = 0; a < axes.size(); ++a) {
        set_path(doc, axes[a].first, axes[a].second[idx[a]]);
        const auto dot = axes[a].first.rfind('.');
        const std::string leaf = dot == std::string::npos ? axes[a].first : axes[a].first.substr(dot + 1);
        std::string val = axes[a].second[idx[a]].dump();
        std::erase_if(val, [](char c) { return c == '"' || c == ' ' || c == '/' || c == '\\'; });
        id += "__" + leaf + "=" + val;
      }
      doc["id"] = id;
      doc.erase("output");
      plan.scenarios.push_back(parse_scenario(doc));
      std::size_t a = axes.size();
      while (a > 0) {
        --a;
        if (++idx[a] < axes[a].second.size()) break;
        idx[a] = 0;
        if (a == 0) {
          a = axes.size() + 1;
          break;
        }
      }
      if (a == axes.size() + 1) break;
    }
  }
  if (plan.scenarios.empty()) throw InvalidArgument("sweep contains no scenarios");
  std::set<std::string> ids;
  for (const auto& s : plan.scenarios) {
    if (!ids.insert(s.id).second) throw InvalidArgument("duplicate scenario id '" + s.id + "' in sweep");
  }
  return plan;
}

std::vector<SweepRow> run_sweep(const SweepPlan& plan, const std::string& out, int threads,
                                double tol_scale) {
  const std::size_t n = plan.scenarios.size();
  std::vector<SweepRow> rows(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= n) return;
      const Scenario& s = plan.scenarios[k];
      SweepRow& row = rows[k];
      row.id = s.id;
      try {
        RunOptions ro;
        ro.out = (fs::path(out) / s.id).string();
        ro.tol_scale = tol_scale;
        row.report = run_scenario(s, ro).report;
        row.status = row.report.all_pass() ? "ok" : "verdict_failed";
      } catch (const std::exception& e) {
        row.status = "error";
        row.message = e.what();
        const auto nl = row.message.find('\n');
        if (nl != std::string::npos) row.message.resize(nl);
        row.report = DecayReport{};
        row.report.id = s.id;
      }
    }
  };
  const int nt = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  fs::create_directories(out);
  Json all = Json::object();
  all["id"] = plan.id;
  Json list = Json::array();
  for (const auto& row : rows) {
    Json j = row.status == "error" ? Json::object() : row.report.to_json();
    if (row.status == "error") j["id"] = row.id;
    j["status"] = row.status;
    if (!row.message.empty()) j["message"] = row.message;
    list.push_back(j);
  }
  all["scenarios"] = list;
  {
    std::ofstream os(fs::path(out) / "report.json", std::ios::binary);
    write_report_json(os, all);
  }
  {
    std::ofstream os(fs::path(out) / "constants.csv", std::ios::binary);
    write_sweep_csv(os, rows);
  }
  return rows;
}

}  // namespace agmonkit
