// AVX2 kernels. Compiled with -mavx2 only (no FMA) so every lane performs
// the same rounded multiply and add as the scalar reference.

#include <immintrin.h>

#include <cmath>

#include "agmonkit/simd.hpp"

namespace agmonkit::simd {
namespace {

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, p);
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (int k = 0; i < n; ++i, ++k) {
    const double p = a[i] * b[i];
    lane[k] = lane[k] + p;
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (int k = 0; i < n; ++i, ++k) lane[k] = lane[k] + a[i];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double max_abs_avx2(const double* a, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(a + i)));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, m);
  double r = std::fmax(std::fmax(lane[0], lane[1]), std::fmax(lane[2], lane[3]));
  for (; i < n; ++i) r = std::fmax(r, std::fabs(a[i]));
  return r;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d p = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), p));
  }
  for (; i < n; ++i) {
    const double p = alpha * x[i];
    y[i] = y[i] + p;
  }
}

void xpby_avx2(const double* x, double beta, double* y, std::size_t n) {
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d p = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(x + i), p));
  }
  for (; i < n; ++i) {
    const double p = beta * y[i];
    y[i] = x[i] + p;
  }
}

void scale_avx2(double alpha, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] = alpha * x[i];
}

inline double stencil_point(const double* diag, const double* u, double coef, std::size_t i,
                            std::size_t n) {
  const double left = i > 0 ? u[i - 1] : 0.0;
  const double right = i + 1 < n ? u[i + 1] : 0.0;
  const double d = diag[i] * u[i];
  const double c = coef * (left + right);
  return d - c;
}

void stencil_row_avx2(const double* diag, const double* u, double coef, double* out,
                      std::size_t n) {
  if (n < 6) {
    for (std::size_t i = 0; i < n; ++i) out[i] = stencil_point(diag, u, coef, i, n);
    return;
  }
  out[0] = stencil_point(diag, u, coef, 0, n);
  const __m256d vc = _mm256_set1_pd(coef);
  std::size_t i = 1;
  for (; i + 4 <= n - 1; i += 4) {
    const __m256d d = _mm256_mul_pd(_mm256_loadu_pd(diag + i), _mm256_loadu_pd(u + i));
    const __m256d lr = _mm256_add_pd(_mm256_loadu_pd(u + i - 1), _mm256_loadu_pd(u + i + 1));
    _mm256_storeu_pd(out + i, _mm256_sub_pd(d, _mm256_mul_pd(vc, lr)));
  }
  for (; i < n; ++i) out[i] = stencil_point(diag, u, coef, i, n);
}

void neighbor_sub_avx2(const double* a, const double* b, double coef, double* out,
                       std::size_t n) {
  const __m256d vc = _mm256_set1_pd(coef);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d s = _mm256_add_pd(_mm256_loadu_pd(a + i), b ? _mm256_loadu_pd(b + i) : zero);
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(out + i), _mm256_mul_pd(vc, s)));
  }
  for (; i < n; ++i) {
    const double s = b ? a[i] + b[i] : a[i] + 0.0;
    const double c = coef * s;
    out[i] = out[i] - c;
  }
}

}  // namespace

const KernelTable* avx2_kernels_compiled() {
  static const KernelTable table{
      "avx2",           dot_avx2,  sum_avx2,         max_abs_avx2,
      axpy_avx2,        xpby_avx2, scale_avx2,       stencil_row_avx2,
      neighbor_sub_avx2};
  return &table;
}

}  // namespace agmonkit::simd
