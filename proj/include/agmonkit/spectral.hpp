#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "agmonkit/grid.hpp"

namespace agmonkit {

/// Finite-difference H = -Delta_h + V on the interior nodes of a box with
/// homogeneous Dirichlet data. Vectors hold interior values only, row-major;
/// the inner product carries the cell volume so that it matches the
/// trapezoidal quadrature of fields that vanish on the boundary.
class HamiltonianOp {
 public:
  HamiltonianOp() = default;
  explicit HamiltonianOp(GridField v);

  const Grid& grid() const { return v_.grid(); }
  const GridField& potential() const { return v_; }
  std::size_t size() const { return diag_.size(); }
  /// Unknowns form rows x cols, row-major; a 1D grid is a single row.
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> diagonal() const { return diag_; }
  /// Off-diagonal magnitudes: 1/h^2 along a row, and between rows (0 in 1D).
  double coupling_in_row() const { return c_in_; }
  double coupling_between_rows() const { return c_between_; }

  void apply(std::span<const double> u, std::span<double> out) const;
  double inner(std::span<const double> u, std::span<const double> v) const;
  double norm(std::span<const double> u) const;

  std::vector<double> restrict_field(const GridField& f) const;
  /// Interior vector to a full field with zeros on the boundary.
  GridField embed(std::span<const double> u) const;

 private:
  GridField v_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  double c_in_ = 0.0;
  double c_between_ = 0.0;
  std::vector<double> diag_;
};

HamiltonianOp assemble_hamiltonian(const GridField& v);

struct EigenPair {
  double E = 0.0;
  /// Unit norm; the largest |psi| entry is positive.
  GridField psi;
  double residual = 0.0;
  int iterations = 0;
};

struct EigenOptions {
  int max_iterations = 20000;
  int max_cg_iterations = 20000;
  /// Start vectors after the first get seeded noise so that states of either
  /// parity are reachable. Null keeps the built-in seed.
  std::optional<std::uint64_t> seed;
};

/// k lowest eigenpairs by inverse iteration with shift m_V - 1, deflating
/// previously found pairs. Throws ConvergenceError if the residual stays
/// above tol.
std::vector<EigenPair> lowest_eigenpairs(const HamiltonianOp& h, int k, double tol,
                                         const EigenOptions& options = {});

/// ||H psi - E psi||_2 in the grid-weighted norm.
double residual(const HamiltonianOp& h, const EigenPair& p);

/// Solves (H - sigma) x = b by conjugate gradients with an incomplete
/// Cholesky preconditioner; returns the iteration count.
int solve_shifted(const HamiltonianOp& h, double sigma, std::span<const double> b,
                  std::span<double> x, double rel_tol, int max_iterations);

struct PerssonReport {
  GridField W;
  double level = 0.0;  // E0 + delta
  double sup_W = 0.0;
  double measure_A = 0.0;
  double l2_norm_W = 0.0;
  /// (E0 + delta - m_V) |A|^{1/2}
  double l2_bound = 0.0;
  /// (E0 + delta - m_V) |A|, the form without the square root.
  double l2_bound_unrooted = 0.0;
  bool floor_ok = false;
  bool range_ok = false;
  bool bound_ok = false;
};

/// W = chi_{V <= E0 + delta} (E0 + delta - V); checks V + W >= E0 + delta and
/// 0 <= W <= E0 + delta - m_V at every node.
PerssonReport persson_gap_check(const GridField& v, double E0, double delta);

}  // namespace agmonkit
