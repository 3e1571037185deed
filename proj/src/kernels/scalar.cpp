#include "occamnet/kernels.hpp"

#include <cmath>

namespace occamnet::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void add_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_add_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += a[i] * b[i];
}

void scale_scalar(double alpha, const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * x[i];
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

void adadelta_scalar(double* param, const double* grad, double* sq_grad, double* sq_delta,
                     double rho, double eps, std::size_t n) {
  const double keep = 1.0 - rho;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    sq_grad[i] = rho * sq_grad[i] + keep * (g * g);
    const double delta = -(std::sqrt(sq_delta[i] + eps) / std::sqrt(sq_grad[i] + eps)) * g;
    sq_delta[i] = rho * sq_delta[i] + keep * (delta * delta);
    param[i] += delta;
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{
      "scalar",      &dot_scalar,   &axpy_scalar, &add_scalar,      &mul_scalar,
      &mul_add_scalar, &scale_scalar, &sum_scalar, &adadelta_scalar,
  };
  return table;
}

}  // namespace occamnet::kernels
