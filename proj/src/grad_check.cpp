#include "occamnet/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace occamnet {

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  os << (passed() ? "PASS" : "FAIL") << " entries=" << entries_checked << " max_rel_error=" << max_rel_error
     << " tolerance=" << tolerance;
  if (!failures.empty()) {
    const auto& f = failures.front();
    os << " first_failure=" << f.parameter << "[" << f.index << "] analytic=" << f.analytic
       << " numeric=" << f.numeric;
  }
  return os.str();
}

GradCheckReport grad_check(const ExpressionBuilder& build, const ParameterRefs& params, double step,
                           double tolerance) {
  if (!(step > 0.0)) throw std::invalid_argument("grad_check: step must be positive");
  GradCheckReport report;
  report.tolerance = tolerance;

  for (Parameter* p : params) p->zero_grad();
  Graph graph;
  graph.backward(build(graph));
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) analytic.push_back(p->grad);

  auto evaluate = [&]() {
    graph.clear();
    return graph.scalar(build(graph));
  };

  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + step;
      const double up = evaluate();
      p.value[i] = saved - step;
      const double down = evaluate();
      p.value[i] = saved;

      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.entries_checked;
      report.max_rel_error = std::max(report.max_rel_error, rel);
      if (!(rel <= tolerance)) report.failures.push_back({p.name, i, a, numeric, rel});
    }
  }
  for (Parameter* p : params) p->zero_grad();
  return report;
}

}  // namespace occamnet
