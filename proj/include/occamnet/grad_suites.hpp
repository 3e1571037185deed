#pragma once

// Ready-made gradient checks over the primitives and every recurrent model.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "occamnet/cells.hpp"
#include "occamnet/grad_check.hpp"

namespace occamnet {

struct GradSuiteOptions {
  std::size_t input = 3;
  std::size_t hidden = 4;
  std::size_t layers = 6;
  std::size_t steps = 4;
  GateKind gate = GateKind::kQuad;
  std::uint64_t seed = 0;
  double step = 1e-5;
  double tolerance = 1e-4;
};

struct NamedReport {
  std::string name;
  GradCheckReport report;
};

/// primitives, lstm, gated-lstm, stacked, hg-lstm
const std::vector<std::string>& grad_suite_models();

/// Throws std::invalid_argument for an unknown model name.
std::vector<NamedReport> grad_suite(const std::string& model, const GradSuiteOptions& options);

}  // namespace occamnet
