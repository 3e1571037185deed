// Compiled with -mavx2 -mfma. Only reached through avx2_table() after a
// runtime CPU check.
#include "occamnet/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace occamnet::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void add_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_add_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                                              _mm256_loadu_pd(out + i)));
  }
  for (; i < n; ++i) out[i] += a[i] * b[i];
}

void scale_avx2(double alpha, const double* x, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) out[i] = alpha * x[i];
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double total = hsum(acc);
  for (; i < n; ++i) total += x[i];
  return total;
}

// No FMA here: the update stays bit-identical to the scalar reference.
void adadelta_avx2(double* param, const double* grad, double* sq_grad, double* sq_delta,
                   double rho, double eps, std::size_t n) {
  const double keep = 1.0 - rho;
  const __m256d vrho = _mm256_set1_pd(rho);
  const __m256d vkeep = _mm256_set1_pd(keep);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    __m256d eg = _mm256_loadu_pd(sq_grad + i);
    eg = _mm256_add_pd(_mm256_mul_pd(vrho, eg), _mm256_mul_pd(vkeep, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(sq_grad + i, eg);
    __m256d ed = _mm256_loadu_pd(sq_delta + i);
    const __m256d ratio = _mm256_div_pd(_mm256_sqrt_pd(_mm256_add_pd(ed, veps)),
                                        _mm256_sqrt_pd(_mm256_add_pd(eg, veps)));
    const __m256d delta = _mm256_mul_pd(_mm256_xor_pd(ratio, sign), g);
    ed = _mm256_add_pd(_mm256_mul_pd(vrho, ed), _mm256_mul_pd(vkeep, _mm256_mul_pd(delta, delta)));
    _mm256_storeu_pd(sq_delta + i, ed);
    _mm256_storeu_pd(param + i, _mm256_add_pd(_mm256_loadu_pd(param + i), delta));
  }
  for (; i < n; ++i) {
    const double g = grad[i];
    sq_grad[i] = rho * sq_grad[i] + keep * (g * g);
    const double delta = -(std::sqrt(sq_delta[i] + eps) / std::sqrt(sq_grad[i] + eps)) * g;
    sq_delta[i] = rho * sq_delta[i] + keep * (delta * delta);
    param[i] += delta;
  }
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{
      "avx2",      &dot_avx2,   &axpy_avx2, &add_avx2,      &mul_avx2,
      &mul_add_avx2, &scale_avx2, &sum_avx2, &adadelta_avx2,
  };
  return &table;
}

}  // namespace occamnet::kernels
