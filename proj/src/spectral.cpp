#include "agmonkit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "agmonkit/error.hpp"
#include "agmonkit/field_io.hpp"
#include "agmonkit/potential.hpp"
#include "agmonkit/simd.hpp"

namespace agmonkit {

HamiltonianOp::HamiltonianOp(GridField v) : v_(std::move(v)) {
  const Grid& g = v_.grid();
  if (g.dim() == 1) {
    rows_ = 1;
    cols_ = g.n(0) - 2;
    c_in_ = 1.0 / (g.h(0) * g.h(0));
    c_between_ = 0.0;
  } else {
    rows_ = g.n(0) - 2;
    cols_ = g.n(1) - 2;
    c_in_ = 1.0 / (g.h(1) * g.h(1));
    c_between_ = 1.0 / (g.h(0) * g.h(0));
  }
  diag_.resize(rows_ * cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      const std::size_t node = g.dim() == 1 ? c + 1 : g.flatten(r + 1, c + 1);
      diag_[r * cols_ + c] = 2.0 * c_in_ + 2.0 * c_between_ + v_[node];
    }
  }
}

void HamiltonianOp::apply(std::span<const double> u, std::span<double> out) const {
  const auto& k = simd::kernels();
  for (std::size_t r = 0; r < rows_; ++r) {
    const std::size_t off = r * cols_;
    k.stencil_row(diag_.data() + off, u.data() + off, c_in_, out.data() + off, cols_);
    if (rows_ == 1) continue;
    const double* above = r > 0 ? u.data() + off - cols_ : nullptr;
    const double* below = r + 1 < rows_ ? u.data() + off + cols_ : nullptr;
    if (!above) std::swap(above, below);
    k.neighbor_sub(above, below, c_between_, out.data() + off, cols_);
  }
}

double HamiltonianOp::inner(std::span<const double> u, std::span<const double> v) const {
  return grid().cell_volume() * simd::dot(u, v);
}

double HamiltonianOp::norm(std::span<const double> u) const { return std::sqrt(inner(u, u)); }

std::vector<double> HamiltonianOp::restrict_field(const GridField& f) const {
  if (!(f.grid() == grid())) throw InvalidArgument("field lives on a different grid");
  const Grid& g = grid();
  std::vector<double> u(size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      u[r * cols_ + c] = f[g.dim() == 1 ? c + 1 : g.flatten(r + 1, c + 1)];
    }
  }
  return u;
}

GridField HamiltonianOp::embed(std::span<const double> u) const {
  const Grid& g = grid();
  std::vector<double> full(g.size(), 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      full[g.dim() == 1 ? c + 1 : g.flatten(r + 1, c + 1)] = u[r * cols_ + c];
    }
  }
  return GridField(g, std::move(full));
}

HamiltonianOp assemble_hamiltonian(const GridField& v) { return HamiltonianOp(v); }

namespace {

// Incomplete Cholesky of the 5-point (or 3-point) matrix H - sigma in the
// form (D + L) D^-1 (D + L^T); exact for the tridiagonal 1D case.
class IncompleteCholesky {
 public:
  IncompleteCholesky(const HamiltonianOp& h, double sigma)
      : rows_(h.rows()), cols_(h.cols()), a_(h.coupling_in_row()), b_(h.coupling_between_rows()) {
    const auto diag = h.diagonal();
    d_.resize(diag.size());
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < cols_; ++c) {
        const std::size_t k = r * cols_ + c;
        double d = diag[k] - sigma;
        if (c > 0) d -= a_ * a_ / d_[k - 1];
        if (r > 0) d -= b_ * b_ / d_[k - cols_];
        if (!(d > 0.0)) throw Error("incomplete Cholesky broke down; shift is not below the spectrum");
        d_[k] = d;
      }
    }
  }

  void solve(std::span<const double> rhs, std::span<double> z) const {
    const std::size_t n = d_.size();
    for (std::size_t k = 0; k < n; ++k) {
      double y = rhs[k];
      if (k % cols_ > 0) y += a_ * z[k - 1];
      if (k >= cols_) y += b_ * z[k - cols_];
      z[k] = y / d_[k];
    }
    for (std::size_t k = n; k-- > 0;) {
      double t = 0.0;
      if (k % cols_ + 1 < cols_) t += a_ * z[k + 1];
      if (k + cols_ < n) t += b_ * z[k + cols_];
      z[k] += t / d_[k];
    }
  }

 private:
  std::size_t rows_, cols_;
  double a_, b_;
  std::vector<double> d_;
};

int pcg(const HamiltonianOp& h, double sigma, const IncompleteCholesky& pre,
        std::span<const double> b, std::span<double> x, double rel_tol, int max_iterations) {
  const std::size_t n = h.size();
  std::vector<double> r(b.begin(), b.end()), z(n), p(n), ap(n);
  std::fill(x.begin(), x.end(), 0.0);
  const double bnorm = std::sqrt(simd::dot(b, b));
  if (bnorm == 0.0) return 0;
  pre.solve(r, z);
  p = z;
  double rz = simd::dot(r, z);
  for (int it = 1; it <= max_iterations; ++it) {
    h.apply(p, ap);
    simd::axpy(-sigma, p, ap);
    const double alpha = rz / simd::dot(p, ap);
    simd::axpy(alpha, p, x);
    simd::axpy(-alpha, ap, r);
    if (std::sqrt(simd::dot(r, r)) <= rel_tol * bnorm) return it;
    pre.solve(r, z);
    const double rz_new = simd::dot(r, z);
    simd::xpby(z, rz_new / rz, p);
    rz = rz_new;
  }
  return max_iterations;
}

// Uniform in [-0.5, 0.5) from the raw engine output, identical on every
// standard library.
std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = static_cast<double>(eng() >> 11) * 0x1.0p-53 - 0.5;
  return v;
}

void deflate(const HamiltonianOp& h, const std::vector<std::vector<double>>& basis,
             std::vector<double>& x) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& q : basis) simd::axpy(-h.inner(q, x), q, x);
  }
}

void normalize(const HamiltonianOp& h, std::vector<double>& x) {
  const double nrm = h.norm(x);
  if (!(nrm > 0.0)) throw Error("inverse iteration collapsed to the zero vector");
  simd::scale(1.0 / nrm, x);
}

}  // namespace

int solve_shifted(const HamiltonianOp& h, double sigma, std::span<const double> b,
                  std::span<double> x, double rel_tol, int max_iterations) {
  const IncompleteCholesky pre(h, sigma);
  return pcg(h, sigma, pre, b, x, rel_tol, max_iterations);
}

std::vector<EigenPair> lowest_eigenpairs(const HamiltonianOp& h, int k, double tol,
                                         const EigenOptions& options) {
  if (k < 1) throw InvalidArgument("lowest_eigenpairs needs k >= 1");
  if (!(tol > 0.0)) throw InvalidArgument("lowest_eigenpairs needs tol > 0");
  const std::size_t n = h.size();
  if (static_cast<std::size_t>(k) > n) throw InvalidArgument("k exceeds the number of unknowns");

  const double sigma = infimum(h.potential()) - 1.0;
  const IncompleteCholesky pre(h, sigma);
  const std::uint64_t seed = options.seed.value_or(0x5eedULL);

  std::vector<std::vector<double>> found;
  std::vector<EigenPair> out;
  std::vector<double> y(n), hx(n), r(n);
  for (int p = 0; p < k; ++p) {
    std::vector<double> x(n, 1.0);
    if (p > 0 || options.seed) {
      const auto e = noise(n, seed + static_cast<std::uint64_t>(p));
      simd::axpy(1.0, e, x);
    }
    deflate(h, found, x);
    normalize(h, x);

    double E = 0.0;
    double res = std::numeric_limits<double>::infinity();
    double best = res;
    int since_best = 0;
    int it = 0;
    while (true) {
      h.apply(x, hx);
      E = h.inner(x, hx);
      r = hx;
      simd::axpy(-E, x, r);
      res = h.norm(r);
      if (res <= tol) break;
      if (res < 0.999 * best) {
        best = res;
        since_best = 0;
      } else if (++since_best > 500) {
        throw ConvergenceError("eigenpair " + std::to_string(p) + " stalled at residual " +
                                   format_double(res) + " above tol " + format_double(tol),
                               res);
      }
      if (++it > options.max_iterations) {
        throw ConvergenceError("eigenpair " + std::to_string(p) + " did not converge; residual " +
                                   format_double(res),
                               res);
      }
      pcg(h, sigma, pre, x, y, 1e-14, options.max_cg_iterations);
      x = y;
      deflate(h, found, x);
      normalize(h, x);
    }
    std::size_t imax = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::fabs(x[i]) > std::fabs(x[imax])) imax = i;
    }
    if (x[imax] < 0.0) {
      simd::scale(-1.0, x);
    }
    EigenPair pair;
    pair.E = E;
    pair.psi = h.embed(x);
    pair.residual = res;
    pair.iterations = it;
    out.push_back(std::move(pair));
    found.push_back(std::move(x));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const EigenPair& a, const EigenPair& b) { return a.E < b.E; });
  return out;
}

double residual(const HamiltonianOp& h, const EigenPair& p) {
  const auto x = h.restrict_field(p.psi);
  std::vector<double> hx(x.size());
  h.apply(x, hx);
  simd::axpy(-p.E, x, hx);
  return h.norm(hx);
}

PerssonReport persson_gap_check(const GridField& v, double E0, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("persson_gap_check needs delta > 0");
  PerssonReport rep;
  rep.level = E0 + delta;
  const double m = infimum(v);
  std::vector<double> w(v.size(), 0.0), w2(v.size(), 0.0);
  rep.floor_ok = true;
  rep.range_ok = true;
  const double top = rep.level - m;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] <= rep.level) w[i] = rep.level - v[i];
    w2[i] = w[i] * w[i];
    const double ulp = 4.0 * std::numeric_limits<double>::epsilon() *
                       std::max({1.0, std::fabs(v[i]), std::fabs(rep.level)});
    if (v[i] + w[i] < rep.level - ulp) rep.floor_ok = false;
    if (w[i] < 0.0 || w[i] > top + ulp) rep.range_ok = false;
    rep.sup_W = std::max(rep.sup_W, w[i]);
  }
  rep.W = GridField(v.grid(), std::move(w));
  rep.measure_A = sublevel_measure(sublevel_indicator(v, rep.level));
  rep.l2_norm_W = std::sqrt(integrate(GridField(v.grid(), std::move(w2))));
  rep.l2_bound = top * std::sqrt(rep.measure_A);
  rep.l2_bound_unrooted = top * rep.measure_A;
  rep.bound_ok = rep.l2_norm_W <= rep.l2_bound * (1.0 + 1e-12);
  return rep;
}

}  // namespace agmonkit
