#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "occamnet/graph.hpp"

namespace occamnet {

struct GradCheckFailure {
  std::string parameter;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  std::size_t entries_checked = 0;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  std::vector<GradCheckFailure> failures;

  bool passed() const { return failures.empty(); }
  std::string summary() const;
};

/// Builds a scalar expression on the given graph; must be deterministic in
/// the parameter values.
using ExpressionBuilder = std::function<Var(Graph&)>;

/// Denominator floor of the relative error, so gradients near zero are
/// judged on an absolute scale of this size.
inline constexpr double kGradCheckFloor = 1e-5;

/// Compares backward() against central differences for every entry of every
/// parameter. rel = |a - n| / max(|a|, |n|, kGradCheckFloor).
/// Throws std::invalid_argument when step <= 0. Parameter gradients are
/// zeroed before and after the check.
GradCheckReport grad_check(const ExpressionBuilder& build, const ParameterRefs& params, double step = 1e-5,
                           double tolerance = 1e-4);

}  // namespace occamnet
