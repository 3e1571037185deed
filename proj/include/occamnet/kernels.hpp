#pragma once

// Inner-loop kernels over contiguous double arrays.
//
// Every kernel has a scalar reference implementation. An AVX2 variant is
// compiled separately and selected once at startup when the CPU supports it.
// Setting OCCAMNET_SIMD=scalar in the environment forces the reference path.

#include <cstddef>
#include <string_view>

namespace occamnet::kernels {

struct KernelTable {
  std::string_view name;

  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// out[i] = a[i] + b[i]
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  /// out[i] = a[i] * b[i]
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  /// out[i] += a[i] * b[i]
  void (*mul_add)(const double* a, const double* b, double* out, std::size_t n);
  /// out[i] = alpha * x[i]
  void (*scale)(double alpha, const double* x, double* out, std::size_t n);
  /// sum_i x[i]
  double (*sum)(const double* x, std::size_t n);
  /// AdaDelta update, in place over param and both accumulators.
  void (*adadelta)(double* param, const double* grad, double* sq_grad, double* sq_delta,
                   double rho, double eps, std::size_t n);
};

const KernelTable& scalar_table();
/// nullptr when the AVX2 variants were not compiled in.
const KernelTable* avx2_table();

bool cpu_supports_avx2();

/// The table chosen for this process. Resolved once, thread-safe.
const KernelTable& active();

}  // namespace occamnet::kernels
