#include "agmonkit/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "agmonkit/error.hpp"
#include "agmonkit/field_io.hpp"

namespace agmonkit {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double dist_sq(const Point& p, const Point& c) {
  const double dx = p.x - c.x;
  const double dy = p.y - c.y;
  return dx * dx + dy * dy;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be finite");
}

double eval_piecewise(const PiecewiseLinear& p, double x) {
  const auto& k = p.knots;
  if (x <= k.front()) return p.values.front();
  if (x >= k.back()) return p.values.back();
  const auto it = std::upper_bound(k.begin(), k.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - k.begin());
  const double t = (x - k[i - 1]) / (k[i] - k[i - 1]);
  return p.values[i - 1] + t * (p.values[i] - p.values[i - 1]);
}

double eval_spiky(const SpikyPotential& s, double x) {
  const double base = (*s.base)(Point{x, 0.0});
  // Spikes are sorted and disjoint; find the first whose right edge is >= x.
  const auto it = std::lower_bound(s.spikes.begin(), s.spikes.end(), x,
                                   [](const Spike& sp, double v) {
                                     return sp.center + 0.5 * sp.width < v;
                                   });
  if (it == s.spikes.end()) return base;
  const double d = std::fabs(x - it->center);
  const double q = 0.25 * it->width;
  if (d > 2.0 * q) return base;
  if (d <= q) return s.floor;
  const double t = (2.0 * q - d) / q;
  return base + t * (s.floor - base);
}

}  // namespace

PotentialSpec::PotentialSpec(Kind kind) : kind_(std::move(kind)) {
  std::visit(Overloaded{
                 [](const ConstantPotential& c) { require_finite(c.value, "constant value"); },
                 [](const HarmonicPotential& h) {
                   require_finite(h.k, "harmonic k");
                   if (h.k < 0.0) throw InvalidArgument("harmonic k must be >= 0");
                 },
                 [](const SquareWell& w) {
                   if (!(w.depth > 0.0) || !(w.half_width > 0.0) || !std::isfinite(w.depth) ||
                       !std::isfinite(w.half_width)) {
                     throw InvalidArgument("square well needs depth > 0 and half_width > 0");
                   }
                 },
                 [](const GaussianWell& w) {
                   if (!(w.depth > 0.0) || !(w.width > 0.0) || !std::isfinite(w.depth) ||
                       !std::isfinite(w.width)) {
                     throw InvalidArgument("gaussian well needs depth > 0 and width > 0");
                   }
                 },
                 [](const PiecewiseLinear& p) {
                   if (p.knots.size() < 2 || p.knots.size() != p.values.size()) {
                     throw InvalidArgument("piecewise_linear needs >= 2 knots and one value per knot");
                   }
                   for (std::size_t i = 0; i < p.knots.size(); ++i) {
                     require_finite(p.knots[i], "knot");
                     require_finite(p.values[i], "knot value");
                     if (i && !(p.knots[i] > p.knots[i - 1])) {
                       throw InvalidArgument("piecewise_linear knots must be strictly increasing");
                     }
                   }
                 },
                 [](const SpikyPotential& s) {
                   if (!s.base) throw InvalidArgument("spiky potential needs a base");
                   require_finite(s.floor, "spike floor");
                   for (std::size_t i = 0; i < s.spikes.size(); ++i) {
                     if (!(s.spikes[i].width > 0.0)) throw InvalidArgument("spike width must be > 0");
                     if (i && !(s.spikes[i - 1].center + 0.5 * s.spikes[i - 1].width <
                                s.spikes[i].center - 0.5 * s.spikes[i].width)) {
                       throw InvalidArgument("spikes overlap");
                     }
                   }
                 },
             },
             kind_);
}

PotentialSpec PotentialSpec::constant(double value) {
  return PotentialSpec(ConstantPotential{value});
}
PotentialSpec PotentialSpec::harmonic(double k, Point center) {
  return PotentialSpec(HarmonicPotential{k, center});
}
PotentialSpec PotentialSpec::square_well(double depth, double half_width, Point center) {
  return PotentialSpec(SquareWell{depth, half_width, center});
}
PotentialSpec PotentialSpec::gaussian_well(double depth, double width, Point center) {
  return PotentialSpec(GaussianWell{depth, width, center});
}
PotentialSpec PotentialSpec::piecewise_linear(std::vector<double> knots, std::vector<double> values) {
  return PotentialSpec(PiecewiseLinear{std::move(knots), std::move(values)});
}

std::string PotentialSpec::kind_name() const {
  static const char* names[] = {"constant",     "harmonic",         "square_well",
                                "gaussian_well", "piecewise_linear", "spiky"};
  return names[kind_.index()];
}

bool PotentialSpec::supports_2d() const {
  return !std::holds_alternative<PiecewiseLinear>(kind_) &&
         !std::holds_alternative<SpikyPotential>(kind_);
}

double PotentialSpec::operator()(const Point& p) const {
  return std::visit(Overloaded{
                        [&](const ConstantPotential& c) { return c.value; },
                        [&](const HarmonicPotential& h) { return h.k * dist_sq(p, h.center); },
                        [&](const SquareWell& w) {
                          // Nodes within rounding of the edge count as on it.
                          const double r = std::sqrt(dist_sq(p, w.center));
                          const double tol = 1e-12 * w.half_width;
                          if (r < w.half_width - tol) return -w.depth;
                          if (r <= w.half_width + tol) return -0.5 * w.depth;
                          return 0.0;
                        },
                        [&](const GaussianWell& w) {
                          return -w.depth * std::exp(-dist_sq(p, w.center) / (w.width * w.width));
                        },
                        [&](const PiecewiseLinear& pl) { return eval_piecewise(pl, p.x); },
                        [&](const SpikyPotential& s) { return eval_spiky(s, p.x); },
                    },
                    kind_);
}

double PotentialSpec::infimum() const {
  return std::visit(Overloaded{
                        [](const ConstantPotential& c) { return c.value; },
                        [](const HarmonicPotential&) { return 0.0; },
                        [](const SquareWell& w) { return -w.depth; },
                        [](const GaussianWell& w) { return -w.depth; },
                        [](const PiecewiseLinear& p) {
                          return *std::min_element(p.values.begin(), p.values.end());
                        },
                        [](const SpikyPotential& s) {
                          const double b = s.base->infimum();
                          return s.spikes.empty() ? b : std::min(b, s.floor);
                        },
                    },
                    kind_);
}

GridField sample(const PotentialSpec& spec, const Grid& grid) {
  if (grid.dim() == 2 && !spec.supports_2d()) {
    throw InvalidArgument("potential kind '" + spec.kind_name() + "' is one-dimensional");
  }
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = spec(grid.point(i));
  return GridField(grid, std::move(v));
}

double infimum(const PotentialSpec& spec) { return spec.infimum(); }

double infimum(const GridField& v) {
  const auto vals = v.values();
  return *std::min_element(vals.begin(), vals.end());
}

GridField sublevel_indicator(const GridField& v, double level) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] <= level ? 1.0 : 0.0;
  return GridField::indicator(v.grid(), std::move(out));
}

double sublevel_measure(const GridField& indicator) {
  for (double x : indicator.values()) {
    if (x != 0.0 && x != 1.0) throw InvalidArgument("sublevel_measure needs an indicator field");
  }
  return integrate(indicator);
}

// ---------------------------------------------------------------------------

double spike_width(std::size_t j, double center, double m_phi, double floor, double l_max) {
  const double jd = static_cast<double>(j);
  const double rate = std::exp(-2.0 * m_phi * std::sqrt(std::fabs(floor)) * (center + 0.5));
  return std::min(l_max, rate / (jd * jd));
}

double sublevel_half_width(const PotentialSpec& base, double level, double search) {
  if (!(search > 0.0)) throw InvalidArgument("search radius must be > 0");
  constexpr int kSteps = 200000;
  const double step = search / kSteps;
  double found = 0.0;
  bool any = false;
  for (int side = -1; side <= 1; side += 2) {
    // Scan inward from the search edge; the first hit bounds the set on this side.
    for (int k = kSteps; k >= 0; --k) {
      const double x = side * step * k;
      if (base(Point{x, 0.0}) <= level) {
        double lo = std::fabs(x);
        double hi = std::min(search, lo + step);
        for (int it = 0; it < 80 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
          const double mid = 0.5 * (lo + hi);
          if (base(Point{side * mid, 0.0}) <= level) lo = mid; else hi = mid;
        }
        found = std::max(found, hi);
        any = true;
        break;
      }
    }
  }
  return any ? found : 0.0;
}

SpikyExample build_spiky_example(const PotentialSpec& base, double E0, const Weight& weight,
                                 std::size_t J, const CenterRule& rule,
                                 const SpikyOptions& options) {
  const auto& k = base.kind();
  if (!std::holds_alternative<GaussianWell>(k) && !std::holds_alternative<SquareWell>(k) &&
      !std::holds_alternative<PiecewiseLinear>(k)) {
    throw InvalidArgument("spiky base must be gaussian_well, square_well or piecewise_linear");
  }
  const double m = base.infimum();
  if (!(E0 < 0.0)) throw InvalidArgument("construction level E0 must be < 0");
  if (!(m < E0)) throw InvalidArgument("base infimum must lie below E0");
  if (!(options.l_max > 0.0 && options.l_max < 1.0)) {
    throw InvalidArgument("l_max must lie in (0, 1)");
  }
  if (!(options.R > 0.0)) throw InvalidArgument("R must be > 0");
  if (!(rule.sigma > 0.0)) throw InvalidArgument("center rule needs sigma > 0");

  SpikySpec spec;
  spec.base = base;
  spec.E0 = E0;
  spec.R = options.R;
  spec.floor = m;
  spec.l_max = options.l_max;
  spec.requested = J;

  const double m_phi = log_derivative_bound(weight);
  std::vector<Spike> spikes;
  std::size_t kept = 0;
  for (std::size_t j = 1; j <= J; ++j) {
    const double c = rule.center(j);
    const double l = spike_width(j, c, m_phi, m, options.l_max);
    if (c + 0.5 * l > options.box_hi) break;
    if (!(c - 0.5 * l > 0.5 * options.R)) {
      throw InvalidArgument("spike " + std::to_string(j) + " at c=" + format_double(c) +
                            " reaches into [-R/2, R/2]");
    }
    if (!spikes.empty()) {
      const Spike& prev = spikes.back();
      if (!(prev.center + 0.5 * prev.width < c - 0.5 * l)) {
        throw InvalidArgument("spikes " + std::to_string(j - 1) + " and " + std::to_string(j) +
                              " overlap");
      }
    }
    for (int k = 0; k <= 64; ++k) {
      const double x = c - 0.5 * l + l * k / 64.0;
      const double v0 = base(Point{x, 0.0});
      if (!(v0 > E0)) {
        throw InvalidArgument("spike " + std::to_string(j) + " at c=" + format_double(c) +
                              " is not inside {V0 > E0}");
      }
      if (v0 > 0.0) throw InvalidArgument("base must be <= 0 across spike " + std::to_string(j));
    }
    spikes.push_back({c, l});
    spec.centers.push_back(c);
    spec.widths.push_back(l);
    ++kept;
  }
  // The width rule makes every term of the series at most j^-2.
  double head = 0.0;
  for (std::size_t j = 1; j <= kept; ++j) head += 1.0 / (static_cast<double>(j) * j);
  spec.dropped_tail_bound = std::max(0.0, std::numbers::pi * std::numbers::pi / 6.0 - head);

  SpikyExample out;
  out.spec = spec;
  if (spikes.empty()) {
    out.potential = base;
  } else {
    out.potential = PotentialSpec(
        SpikyPotential{std::make_shared<const PotentialSpec>(base), std::move(spikes), m});
  }
  return out;
}

double spike_series_partial_sum(const SpikySpec& spec, const Weight& w, std::size_t J) {
  const double root = std::sqrt(std::fabs(spec.floor));
  double sum = 0.0;
  for (std::size_t j = 0; j < std::min(J, spec.centers.size()); ++j) {
    const double p = w(root * (spec.centers[j] + 0.5));
    sum += spec.widths[j] * p * p;
  }
  return sum;
}

double spike_l2_bound(const SpikySpec& spec) {
  double s = 0.0;
  for (double l : spec.widths) s += l;
  return spec.floor * spec.floor * s;
}

// ---------------------------------------------------------------------------

std::size_t origin_node(const Grid& g) { return g.nearest_node(Point{0.0, 0.0}); }

double IntervalDecomposition::measure() const {
  double s = 0.0;
  for (const auto& iv : right) s += iv.cell_measure;
  for (const auto& iv : left) s += iv.cell_measure;
  return s;
}

IntervalDecomposition interval_decomposition_1d(const GridField& indicator) {
  const Grid& g = indicator.grid();
  if (g.dim() != 1) throw InvalidArgument("interval_decomposition_1d needs a 1D grid");
  for (double x : indicator.values()) {
    if (x != 0.0 && x != 1.0) throw InvalidArgument("interval decomposition needs an indicator");
  }
  IntervalDecomposition d;
  d.grid = g;
  const std::size_t n = g.n(0);
  const std::size_t o = origin_node(g);
  d.origin = o;
  const double h = g.h(0);

  // Half-line trapezoid weight of node i on the side it is counted for.
  auto weight = [&](std::size_t i, bool right_side) {
    if (i == o) {
      if (right_side) return o + 1 < n ? 0.5 * h : 0.0;
      return o > 0 ? 0.5 * h : 0.0;
    }
    return (i == 0 || i + 1 == n) ? 0.5 * h : h;
  };
  auto make = [&](std::size_t first, std::size_t last, bool right_side) {
    NodeInterval iv;
    iv.first = first;
    iv.last = last;
    iv.a = g.coord(0, first);
    iv.b = g.coord(0, last);
    for (std::size_t i = first; i <= last; ++i) iv.cell_measure += weight(i, right_side);
    return iv;
  };

  // Right family: runs within [o, n-1], ordered outward.
  for (std::size_t i = o; i < n;) {
    if (indicator[i] != 1.0) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && indicator[j + 1] == 1.0) ++j;
    d.right.push_back(make(i, j, true));
    i = j + 1;
  }
  // Left family: runs within [0, o], ordered outward (decreasing x).
  for (std::size_t i = o + 1; i-- > 0;) {
    if (indicator[i] != 1.0) continue;
    std::size_t j = i;
    while (j > 0 && indicator[j - 1] == 1.0) --j;
    d.left.push_back(make(j, i, false));
    i = j;
  }
  // A one-node run at a boundary origin carries no measure on the empty side.
  auto drop_empty = [](std::vector<NodeInterval>& v) {
    std::erase_if(v, [](const NodeInterval& iv) { return iv.cell_measure == 0.0; });
  };
  drop_empty(d.right);
  drop_empty(d.left);
  return d;
}

}  // namespace agmonkit
