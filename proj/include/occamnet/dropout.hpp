#pragma once

#include "occamnet/graph.hpp"
#include "occamnet/rng.hpp"

namespace occamnet {

enum class DropoutMode { kTrain, kEval };

/// Inverted dropout: in train mode each entry is zeroed with probability p and
/// survivors are scaled by 1/(1-p); eval mode is the identity. p must lie in [0, 1).
Tensor apply_dropout(const Tensor& x, double p, RngStream& rng, DropoutMode mode);

/// Dropout settings for one forward pass. Inactive when rng is null.
struct Dropout {
  double rate = 0.0;
  RngStream* rng = nullptr;

  bool active() const { return rng != nullptr && rate > 0.0; }
  Dropout with_rate(double r) const { return {r, rng}; }
};

/// Graph form: multiplies x by a freshly drawn constant mask when active.
Var apply_dropout(Graph& g, Var x, const Dropout& dropout);

}  // namespace occamnet
