#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace agmonkit::simd {

/// Table of data-parallel kernels. Every variant reduces in the same
/// four-lane order and never fuses multiply-add, so all variants return
/// bit-identical results.
struct KernelTable {
  std::string_view name;

  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// sum_i a[i]
  double (*sum)(const double* a, std::size_t n);
  /// max_i |a[i]| (0 for n == 0)
  double (*max_abs)(const double* a, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// y[i] = x[i] + beta * y[i]
  void (*xpby)(const double* x, double beta, double* y, std::size_t n);
  /// x[i] *= alpha
  void (*scale)(double alpha, double* x, std::size_t n);
  /// out[i] = diag[i] * u[i] - coef * (u[i-1] + u[i+1]), with u[-1] = u[n] = 0.
  void (*stencil_row)(const double* diag, const double* u, double coef, double* out,
                      std::size_t n);
  /// out[i] -= coef * (a[i] + b[i]); b may be null, meaning zero.
  void (*neighbor_sub)(const double* a, const double* b, double coef, double* out,
                       std::size_t n);
};

const KernelTable& scalar_kernels();
/// Null when the build or the running CPU lacks AVX2.
const KernelTable* avx2_kernels();

/// Kernels selected once per process: AVX2 when the CPU supports it, unless
/// the environment variable AGMONKIT_SIMD is set to "scalar".
const KernelTable& kernels();

/// Force a particular table for the rest of the process (tests, benchmarks).
void set_kernels(const KernelTable& table);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return kernels().dot(a.data(), b.data(), a.size());
}
inline double sum(std::span<const double> a) { return kernels().sum(a.data(), a.size()); }
inline double max_abs(std::span<const double> a) {
  return kernels().max_abs(a.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  kernels().axpy(alpha, x.data(), y.data(), x.size());
}
inline void xpby(std::span<const double> x, double beta, std::span<double> y) {
  kernels().xpby(x.data(), beta, y.data(), x.size());
}
inline void scale(double alpha, std::span<double> x) {
  kernels().scale(alpha, x.data(), x.size());
}

}  // namespace agmonkit::simd
