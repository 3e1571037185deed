#include "occamnet/dropout.hpp"

#include <stdexcept>
#include <vector>

namespace occamnet {

namespace {

void check_rate(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("dropout: rate must lie in [0, 1)");
}

}  // namespace

Tensor apply_dropout(const Tensor& x, double p, RngStream& rng, DropoutMode mode) {
  check_rate(p);
  if (mode == DropoutMode::kEval || p == 0.0) return x;
  Tensor out(x.shape());
  const double keep_scale = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = rng.bernoulli(p) ? 0.0 : x[i] * keep_scale;
  return out;
}

Var apply_dropout(Graph& g, Var x, const Dropout& dropout) {
  if (!dropout.active()) return x;
  check_rate(dropout.rate);
  const Shape s = g.shape(x);
  Tensor mask(s);
  const double keep_scale = 1.0 / (1.0 - dropout.rate);
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = dropout.rng->bernoulli(dropout.rate) ? 0.0 : keep_scale;
  return g.hadamard(x, g.constant(mask));
}

}  // namespace occamnet
