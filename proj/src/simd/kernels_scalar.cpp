// Scalar reference kernels. The reductions keep four independent partial
// sums, lane k collecting elements with i % 4 == k, and combine them as
// (l0 + l1) + (l2 + l3). The AVX2 variants use exactly this order.

#include <cmath>

#include "agmonkit/simd.hpp"

namespace agmonkit::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int k = 0; k < 4; ++k) {
      const double p = a[i + k] * b[i + k];
      lane[k] = lane[k] + p;
    }
  }
  for (int k = 0; i < n; ++i, ++k) {
    const double p = a[i] * b[i];
    lane[k] = lane[k] + p;
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double sum_scalar(const double* a, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int k = 0; k < 4; ++k) lane[k] = lane[k] + a[i + k];
  }
  for (int k = 0; i < n; ++i, ++k) lane[k] = lane[k] + a[i];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double max_abs_scalar(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::fmax(m, std::fabs(a[i]));
  return m;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double p = alpha * x[i];
    y[i] = y[i] + p;
  }
}

void xpby_scalar(const double* x, double beta, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double p = beta * y[i];
    y[i] = x[i] + p;
  }
}

void scale_scalar(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = alpha * x[i];
}

void stencil_row_scalar(const double* diag, const double* u, double coef, double* out,
                        std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? u[i - 1] : 0.0;
    const double right = i + 1 < n ? u[i + 1] : 0.0;
    const double d = diag[i] * u[i];
    const double c = coef * (left + right);
    out[i] = d - c;
  }
}

void neighbor_sub_scalar(const double* a, const double* b, double coef, double* out,
                         std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double s = b ? a[i] + b[i] : a[i] + 0.0;
    const double c = coef * s;
    out[i] = out[i] - c;
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar",           dot_scalar,  sum_scalar,         max_abs_scalar,
      axpy_scalar,        xpby_scalar, scale_scalar,       stencil_row_scalar,
      neighbor_sub_scalar};
  return table;
}

}  // namespace agmonkit::simd
