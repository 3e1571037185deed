#include "occamnet/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace occamnet {

std::string Shape::str() const { return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]"; }

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor Tensor::column(std::initializer_list<double> values) {
  Tensor t(values.size(), 1);
  std::copy(values.begin(), values.end(), t.data_.begin());
  return t;
}

Tensor Tensor::column(std::span<const double> values) {
  Tensor t(values.size(), 1);
  std::copy(values.begin(), values.end(), t.data_.begin());
  return t;
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Tensor t(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("Tensor::matrix: ragged rows");
    for (double v : row) t.data_[i++] = v;
  }
  return t;
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw ShapeError("max_abs_diff: " + a.shape().str() + " vs " + b.shape().str());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace occamnet
