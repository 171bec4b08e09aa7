#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "agmonkit/grid.hpp"

namespace agmonkit {

enum class AgmonMethod { quadrature_1d, fast_marching };

std::string method_name(AgmonMethod m);

/// Agmon distance to a source node, rho(x) = inf over paths of the length in
/// the metric (V - E)_+ dx^2.
struct AgmonField {
  GridField rho;
  double E = 0.0;
  AgmonMethod method = AgmonMethod::quadrature_1d;
  std::size_t source = 0;
  /// Distance from the requested source point to the node actually used.
  double snap_distance = 0.0;
};

/// (V - E)_+^{1/2} per node.
std::vector<double> slowness(const GridField& v, double E);

/// rho(x) = |int_0^x (V - E)_+^{1/2} dt| by cumulative trapezoid outward from
/// the node nearest the origin. Throws if the origin lies outside the grid.
AgmonField agmon_1d(const GridField& v, double E);

/// First-order fast marching for |grad rho| = (V - E)_+^{1/2} with rho = 0 at
/// the source (default: the origin). Nodes with V <= E cost nothing to cross.
/// Ties in the queue are broken by node index.
AgmonField agmon_fast_march(const GridField& v, double E,
                            std::optional<Point> source = std::nullopt);

/// Signed max over interior nodes of |grad rho|^2 - (V - E)_+.
double check_eikonal(const AgmonField& rho, const GridField& v, double E);

struct ShellDiagnostic {
  /// Inner radius of each shell.
  std::vector<double> inner_radius;
  std::vector<double> minima;
  bool strictly_increasing = false;
  /// Increasing minima are evidence on a truncated box, not a proof.
  static constexpr const char* label = "heuristic";
};

/// Splits the largest origin-centred ball inside the grid into `shells`
/// annuli of equal width and reports the minimum of rho on each.
ShellDiagnostic check_rho_to_infinity(const AgmonField& rho, int shells);

}  // namespace agmonkit
