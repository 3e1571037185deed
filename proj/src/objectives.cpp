#include "occamnet/objectives.hpp"

#include <algorithm>
#include <stdexcept>

namespace occamnet {

const char* regimen_name(Regimen r) {
  switch (r) {
    case Regimen::kFlat: return "flat";
    case Regimen::kLinear: return "linear";
    case Regimen::kQuadratic: return "quad";
  }
  return "?";
}

Regimen parse_regimen(const std::string& text) {
  if (text == "flat") return Regimen::kFlat;
  if (text == "linear") return Regimen::kLinear;
  if (text == "quad" || text == "quadratic") return Regimen::kQuadratic;
  throw std::invalid_argument("unknown regimen '" + text + "' (expected flat|linear|quad)");
}

void SparsityConfig::validate() const {
  if (!(lambda_max >= 0.0)) throw std::invalid_argument("sparsity: lambda_max must be >= 0");
  if (t_max < 1) throw std::invalid_argument("sparsity: t_max must be >= 1");
}

double lambda_at(const SparsityConfig& cfg, std::size_t epoch) {
  const double ratio = static_cast<double>(epoch) / static_cast<double>(cfg.t_max);
  switch (cfg.regimen) {
    case Regimen::kFlat: return cfg.lambda_max;
    case Regimen::kLinear: return std::min(ratio * cfg.lambda_max, cfg.lambda_max);
    case Regimen::kQuadratic: return std::min(ratio * ratio * cfg.lambda_max, cfg.lambda_max);
  }
  return cfg.lambda_max;
}

void BabiLossConfig::validate() const {
  if (!(margin > 0.0)) throw std::invalid_argument("babi loss: margin must be > 0");
  if (!(mu_unsupporting >= 0.0) || !(lambda_fact >= 0.0) || !(lambda_word >= 0.0)) {
    throw std::invalid_argument("babi loss: weights must be >= 0");
  }
}

namespace {

Var sum_scalars(Graph& g, std::span<const Var> parts) {
  if (parts.empty()) return g.zeros({1, 1});
  return g.sum(g.concat_rows(parts));
}

}  // namespace

Var sparsity_penalty(Graph& g, std::span<const Var> gates, double lambda) {
  return g.scale(sum_scalars(g, gates), lambda);
}

Var sentiment_loss(Graph& g, Var scores, std::size_t label) { return g.neg_log_softmax(scores, label); }

Var paraphrase_loss(Graph& g, Var h1, Var h2, double target, std::span<const Var> gates1,
                    std::span<const Var> gates2, double lambda) {
  const Tensor shift(1, 1, -target);
  const Var diff = g.add(g.cosine(h1, h2), g.constant(shift));
  const Var fit = g.hadamard(diff, diff);
  std::vector<Var> all(gates1.begin(), gates1.end());
  all.insert(all.end(), gates2.begin(), gates2.end());
  return g.add(fit, sparsity_penalty(g, all, lambda));
}

Var margin_prediction_loss(Graph& g, std::span<const Var> score_seq, std::span<const std::size_t> target,
                           double margin) {
  if (score_seq.size() < target.size()) {
    throw std::invalid_argument("margin_prediction_loss: " + std::to_string(score_seq.size()) +
                                " score vectors for a target of length " + std::to_string(target.size()));
  }
  std::vector<Var> terms;
  terms.reserve(target.size());
  for (std::size_t t = 0; t < target.size(); ++t) {
    if (target[t] >= g.shape(score_seq[t]).rows) {
      throw std::out_of_range("margin_prediction_loss: target token " + std::to_string(target[t]) +
                              " outside vocabulary of " + std::to_string(g.shape(score_seq[t]).rows));
    }
    terms.push_back(g.margin_hinge(score_seq[t], target[t], margin));
  }
  return sum_scalars(g, terms);
}

Var fact_selection_loss(Graph& g, std::span<const Var> fact_gates, const std::set<std::size_t>& supporting,
                        double mu) {
  for (std::size_t s : supporting) {
    if (s >= fact_gates.size()) {
      throw std::out_of_range("fact_selection_loss: supporting index " + std::to_string(s) + " >= " +
                              std::to_string(fact_gates.size()) + " facts");
    }
  }
  std::vector<Var> positive;
  std::vector<Var> negative;
  for (std::size_t i = 0; i < fact_gates.size(); ++i) {
    const Var clamped = g.clamp(fact_gates[i], kGateClamp, 1.0 - kGateClamp);
    if (supporting.contains(i)) {
      positive.push_back(g.log(clamped));
    } else {
      negative.push_back(g.log(g.one_minus(clamped)));
    }
  }
  const Var total = g.add(sum_scalars(g, positive), g.scale(sum_scalars(g, negative), mu));
  return g.scale(total, -1.0);
}

Var word_sparsity_loss(Graph& g, std::span<const std::vector<Var>> word_gates) {
  std::vector<Var> all;
  for (const auto& fact : word_gates) all.insert(all.end(), fact.begin(), fact.end());
  return sum_scalars(g, all);
}

Var combined_babi_loss(Graph& g, const BabiLossParts& parts, const BabiLossConfig& cfg) {
  return g.add(g.add(parts.prediction, g.scale(parts.fact, cfg.lambda_fact)), g.scale(parts.word, cfg.lambda_word));
}

}  // namespace occamnet
