#pragma once

// Task losses, the L1 gate-sparsity penalty and its annealing schedules.

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "occamnet/graph.hpp"

namespace occamnet {

enum class Regimen { kFlat, kLinear, kQuadratic };

const char* regimen_name(Regimen r);
/// Accepts flat | linear | quad | quadratic.
Regimen parse_regimen(const std::string& text);

struct SparsityConfig {
  double lambda_max = 0.0;
  std::size_t t_max = 1;
  Regimen regimen = Regimen::kFlat;

  /// Throws std::invalid_argument unless lambda_max >= 0 and t_max >= 1.
  void validate() const;
};

/// flat: lambda_max; linear: min(e/T, 1) lambda_max; quadratic: min((e/T)^2, 1) lambda_max.
double lambda_at(const SparsityConfig& cfg, std::size_t epoch);

struct BabiLossConfig {
  double margin = 1.0;
  double mu_unsupporting = 0.1;
  double lambda_fact = 0.0;
  double lambda_word = 0.0;

  void validate() const;
};

/// Clamp applied to gates before taking logs in the fact-selection loss.
inline constexpr double kGateClamp = 1e-7;

/// lambda * sum of gates. Gates are 1x1 nodes. Empty list gives a zero constant.
Var sparsity_penalty(Graph& g, std::span<const Var> gates, double lambda);

/// KL(one-hot(label) || softmax(scores)) = -log softmax(scores)[label].
Var sentiment_loss(Graph& g, Var scores, std::size_t label);

/// (cos(h1, h2) - target)^2 + lambda * (sum gates1 + sum gates2).
/// Throws DomainError when either state has zero norm.
Var paraphrase_loss(Graph& g, Var h1, Var h2, double target, std::span<const Var> gates1,
                    std::span<const Var> gates2, double lambda);

/// sum over target positions of sum_{w' != w} max(margin - s(w) + s(w'), 0).
/// score_seq must cover at least target.size() positions; extra positions are ignored.
Var margin_prediction_loss(Graph& g, std::span<const Var> score_seq, std::span<const std::size_t> target,
                           double margin);

/// Binary cross-entropy of the fact gates against the supporting set:
///   -[ sum_{i in S} log g_i + mu * sum_{i not in S} log(1 - g_i) ]
/// with gates clamped to [kGateClamp, 1 - kGateClamp].
Var fact_selection_loss(Graph& g, std::span<const Var> fact_gates, const std::set<std::size_t>& supporting, double mu);

/// Sum of every word gate over every fact.
Var word_sparsity_loss(Graph& g, std::span<const std::vector<Var>> word_gates);

struct BabiLossParts {
  Var prediction;
  Var fact;
  Var word;
};

/// E = E_prediction + lambda_fact E_fact + lambda_word E_word.
Var combined_babi_loss(Graph& g, const BabiLossParts& parts, const BabiLossConfig& cfg);

}  // namespace occamnet
