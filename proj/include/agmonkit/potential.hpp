#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "agmonkit/grid.hpp"
#include "agmonkit/weights.hpp"

namespace agmonkit {

struct ConstantPotential {
  double value = 0.0;
};

/// V(x) = k |x - center|^2
struct HarmonicPotential {
  double k = 1.0;
  Point center;
};

/// V = -depth for |x - center| < half_width, 0 outside. Exactly on the edge
/// the node takes the mean of the one-sided values, -depth/2.
struct SquareWell {
  double depth = 1.0;
  double half_width = 1.0;
  Point center;
};

/// V(x) = -depth exp(-|x - center|^2 / width^2)
struct GaussianWell {
  double depth = 1.0;
  double width = 1.0;
  Point center;
};

/// 1D linear interpolation through (knots, values), constant beyond the ends.
struct PiecewiseLinear {
  std::vector<double> knots;
  std::vector<double> values;
};

struct Spike {
  double center = 0.0;
  double width = 0.0;
};

class PotentialSpec;

/// 1D base well with negative spikes: on |x - c| <= l/4 the potential sits on
/// the floor, on l/4 < |x - c| <= l/2 it blends linearly back to the base,
/// elsewhere it equals the base.
struct SpikyPotential {
  std::shared_ptr<const PotentialSpec> base;
  std::vector<Spike> spikes;
  double floor = 0.0;
};

class PotentialSpec {
 public:
  using Kind = std::variant<ConstantPotential, HarmonicPotential, SquareWell, GaussianWell,
                            PiecewiseLinear, SpikyPotential>;

  PotentialSpec() = default;
  /// Validates parameters (positive widths/depths, sorted knots, ...).
  explicit PotentialSpec(Kind kind);

  static PotentialSpec constant(double value);
  static PotentialSpec harmonic(double k = 1.0, Point center = {});
  static PotentialSpec square_well(double depth, double half_width, Point center = {});
  static PotentialSpec gaussian_well(double depth, double width, Point center = {});
  static PotentialSpec piecewise_linear(std::vector<double> knots, std::vector<double> values);

  const Kind& kind() const { return kind_; }
  std::string kind_name() const;
  /// False for kinds defined on the real line only.
  bool supports_2d() const;

  double operator()(const Point& p) const;

  /// Exact infimum over the whole space.
  double infimum() const;

 private:
  Kind kind_{ConstantPotential{}};
};

GridField sample(const PotentialSpec& spec, const Grid& grid);
double infimum(const PotentialSpec& spec);
/// Minimum over grid nodes.
double infimum(const GridField& v);

/// 1 where V <= level, 0 elsewhere (exact comparison).
GridField sublevel_indicator(const GridField& v, double level);
/// Quadrature of an indicator field; throws on values outside {0, 1}.
double sublevel_measure(const GridField& indicator);

// ---------------------------------------------------------------------------
// Spiky construction

struct CenterRule {
  double c0 = 0.0;
  double sigma = 1.0;
  double center(std::size_t j) const { return c0 + sigma * static_cast<double>(j); }
};

struct SpikyOptions {
  double l_max = 0.5;
  /// {V0 <= E0} must lie in [-R/2, R/2].
  double R = 0.0;
  /// Spikes with c_j + l_j/2 beyond this are dropped.
  double box_hi = 1e300;
};

struct SpikySpec {
  PotentialSpec base;
  double E0 = 0.0;
  double R = 0.0;
  double floor = 0.0;  // m_{V0}
  double l_max = 0.5;
  std::vector<double> centers;
  std::vector<double> widths;
  std::size_t requested = 0;
  /// Bound on the dropped part of sum_j l_j phi(|m|^{1/2}(c_j + 1/2))^2 for
  /// the construction weight: sum_{j > kept} j^-2.
  double dropped_tail_bound = 0.0;
};

struct SpikyExample {
  SpikySpec spec;
  PotentialSpec potential;
};

/// Width rule l_j = min(l_max, j^-2 exp(-2 M_phi |m|^{1/2} (c_j + 1/2))).
double spike_width(std::size_t j, double center, double m_phi, double floor, double l_max);

/// Places J spikes at c_j = c0 + sigma j. Throws on overlapping spikes, on a
/// spike reaching into {V0 <= E0} or [-R/2, R/2], or on a base that is not
/// <= 0 across a spike.
SpikyExample build_spiky_example(const PotentialSpec& base, double E0, const Weight& weight,
                                 std::size_t J, const CenterRule& rule,
                                 const SpikyOptions& options);

/// sup{|x| : V0(x) <= level} for a 1D potential, searched on [-search, search].
double sublevel_half_width(const PotentialSpec& base, double level, double search);

/// sum_{j <= J} l_j phi(|m|^{1/2}(c_j + 1/2))^2 over the built spikes.
double spike_series_partial_sum(const SpikySpec& spec, const Weight& w, std::size_t J);
/// m^2 sum_j l_j, the bound on ||V1||_2^2.
double spike_l2_bound(const SpikySpec& spec);

// ---------------------------------------------------------------------------
// 1D interval decomposition

struct NodeInterval {
  double a = 0.0;
  double b = 0.0;
  std::size_t first = 0;
  std::size_t last = 0;
  /// Quadrature measure of the run on its half-line (node weights summed).
  double cell_measure = 0.0;
};

struct IntervalDecomposition {
  Grid grid;
  std::size_t origin = 0;
  /// j >= 0: intervals in [0, inf), ordered outward.
  std::vector<NodeInterval> right;
  /// j < 0: intervals in (-inf, 0], ordered outward.
  std::vector<NodeInterval> left;

  bool empty() const { return right.empty() && left.empty(); }
  /// Sum of cell measures; equals sublevel_measure of the source indicator.
  double measure() const;
};

/// Maximal runs of ones, split at the origin node into right and left families.
IntervalDecomposition interval_decomposition_1d(const GridField& indicator);

/// Index of the node nearest to the origin.
std::size_t origin_node(const Grid& g);

}  // namespace agmonkit
