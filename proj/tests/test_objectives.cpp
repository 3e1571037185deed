#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "occamnet/objectives.hpp"

using namespace occamnet;

namespace {

std::vector<Var> scalars(Graph& g, std::initializer_list<double> xs) {
  std::vector<Var> out;
  for (double x : xs) out.push_back(g.constant(Tensor::matrix({{x}})));
  return out;
}

}  // namespace

TEST(Schedule, Names) {
  EXPECT_EQ(parse_regimen("flat"), Regimen::kFlat);
  EXPECT_EQ(parse_regimen("linear"), Regimen::kLinear);
  EXPECT_EQ(parse_regimen("quad"), Regimen::kQuadratic);
  EXPECT_EQ(parse_regimen("quadratic"), Regimen::kQuadratic);
  EXPECT_STREQ(regimen_name(Regimen::kQuadratic), "quad");
  EXPECT_THROW(parse_regimen("cosine"), std::invalid_argument);
}

TEST(Schedule, Validation) {
  EXPECT_THROW((SparsityConfig{-1.0, 5, Regimen::kFlat}.validate()), std::invalid_argument);
  EXPECT_THROW((SparsityConfig{1.0, 0, Regimen::kFlat}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((SparsityConfig{0.0, 1, Regimen::kLinear}.validate()));
}

TEST(Schedule, HandValues) {
  const SparsityConfig lin{0.01, 10, Regimen::kLinear};
  const SparsityConfig quad{0.01, 10, Regimen::kQuadratic};
  const SparsityConfig flat{0.01, 10, Regimen::kFlat};
  EXPECT_EQ(lambda_at(lin, 0), 0.0);
  EXPECT_EQ(lambda_at(quad, 0), 0.0);
  EXPECT_EQ(lambda_at(flat, 0), 0.01);
  EXPECT_EQ(lambda_at(lin, 5), 0.5 * 0.01);
  EXPECT_EQ(lambda_at(quad, 5), 0.25 * 0.01);
  EXPECT_EQ(lambda_at(lin, 10), 0.01);
  EXPECT_EQ(lambda_at(quad, 25), 0.01);
}

TEST(Schedule, GridPropertiesHold) {
  for (double lmax : {0.0, 1e-4, 0.3, 1.0, 7.0}) {
    for (std::size_t T : {1u, 2u, 3u, 7u, 10u, 50u}) {
      const SparsityConfig f{lmax, T, Regimen::kFlat}, l{lmax, T, Regimen::kLinear}, q{lmax, T, Regimen::kQuadratic};
      double prev_l = -1, prev_q = -1;
      for (std::size_t e = 0; e <= 2 * T; ++e) {
        const double r = static_cast<double>(e) / static_cast<double>(T);
        EXPECT_EQ(lambda_at(l, e), std::min(r * lmax, lmax));
        EXPECT_EQ(lambda_at(q, e), std::min(r * r * lmax, lmax));
        EXPECT_GE(lambda_at(l, e), prev_l);
        EXPECT_GE(lambda_at(q, e), prev_q);
        prev_l = lambda_at(l, e);
        prev_q = lambda_at(q, e);
        if (e <= T) {
          EXPECT_LE(lambda_at(q, e), lambda_at(l, e));
          EXPECT_LE(lambda_at(l, e), lambda_at(f, e));
        } else {
          EXPECT_EQ(lambda_at(l, e), lmax);
          EXPECT_EQ(lambda_at(q, e), lmax);
        }
      }
    }
  }
}

TEST(Losses, UniformSoftmaxIsLogOfClassCount) {
  Graph g;
  const Var loss = sentiment_loss(g, g.zeros({5, 1}), 3);
  EXPECT_NEAR(g.scalar(loss), std::log(5.0), 1e-12);
}

TEST(Losses, SentimentLossIsKlToOneHot) {
  Graph g;
  const std::vector<double> s{0.3, -1.2, 2.0, 0.0, 0.5};
  double z = 0.0;
  for (double x : s) z += std::exp(x);
  EXPECT_NEAR(g.scalar(sentiment_loss(g, g.constant(s, {5, 1}), 2)), std::log(z) - 2.0, 1e-14);
  EXPECT_THROW(sentiment_loss(g, g.constant(s, {5, 1}), 5), std::out_of_range);
}

TEST(Losses, FactSelectionHandValue) {
  Graph g;
  const auto gates = scalars(g, {0.5, 0.5});
  EXPECT_NEAR(g.scalar(fact_selection_loss(g, gates, {0}, 1.0)), 2.0 * std::log(2.0), 1e-12);
}

TEST(Losses, FactSelectionWeightsUnsupportingByMu) {
  Graph g;
  const auto gates = scalars(g, {0.9, 0.2, 0.4});
  const double expected = -(std::log(0.9) + 0.1 * (std::log(0.8) + std::log(0.6)));
  EXPECT_NEAR(g.scalar(fact_selection_loss(g, gates, {0}, 0.1)), expected, 1e-14);
  EXPECT_THROW(fact_selection_loss(g, gates, {3}, 0.1), std::out_of_range);
}

TEST(Losses, FactSelectionStaysFiniteAtSaturatedGates) {
  Graph g;
  const auto gates = scalars(g, {0.0, 1.0});
  const double v = g.scalar(fact_selection_loss(g, gates, {0}, 1.0));
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, -2.0 * std::log(kGateClamp), 1e-6);
}

TEST(Losses, MarginHandCase) {
  Graph g;
  const std::vector<Var> scores{g.zeros({2, 1})};
  const std::vector<std::size_t> target{0};
  EXPECT_EQ(g.scalar(margin_prediction_loss(g, scores, target, 1.0)), 1.0);
}

TEST(Losses, MarginSumsOverPositionsAndCompetitors) {
  Graph g;
  const std::vector<Var> scores{g.constant(Tensor::column({2.0, 0.0, 1.5})), g.constant(Tensor::column({0.0, 0.2, 0.0}))};
  const std::vector<std::size_t> target{0, 1};
  // pos 0: max(1-2+0,0)+max(1-2+1.5,0) = 0.5 ; pos 1: 2 * max(1-0.2,0) = 1.6
  EXPECT_NEAR(g.scalar(margin_prediction_loss(g, scores, target, 1.0)), 2.1, 1e-15);
  const std::vector<std::size_t> too_long{0, 1, 2};
  EXPECT_THROW(margin_prediction_loss(g, scores, too_long, 1.0), std::invalid_argument);
  const std::vector<std::size_t> bad{7};
  EXPECT_THROW(margin_prediction_loss(g, scores, bad, 1.0), std::out_of_range);
}

TEST(Losses, MarginIsZeroOnceSeparated) {
  Graph g;
  const std::vector<Var> scores{g.constant(Tensor::column({0.0, 3.0, 1.9}))};
  const std::vector<std::size_t> target{1};
  EXPECT_EQ(g.scalar(margin_prediction_loss(g, scores, target, 1.0)), 0.0);
}

TEST(Losses, SparsityPenaltyIsScaledSum) {
  Graph g;
  const auto gates = scalars(g, {0.2, 0.7, 0.1});
  EXPECT_NEAR(g.scalar(sparsity_penalty(g, gates, 0.5)), 0.5, 1e-15);
  EXPECT_EQ(g.scalar(sparsity_penalty(g, {}, 0.5)), 0.0);
}

TEST(Losses, ParaphraseLoss) {
  Graph g;
  const Var a = g.constant(Tensor::column({1.0, 0.0}));
  const Var b = g.constant(Tensor::column({1.0, 1.0}));
  const auto g1 = scalars(g, {0.5});
  const auto g2 = scalars(g, {0.25, 0.25});
  const double c = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(g.scalar(paraphrase_loss(g, a, b, 0.5, g1, g2, 0.1)), (c - 0.5) * (c - 0.5) + 0.1, 1e-15);
  EXPECT_THROW(paraphrase_loss(g, a, g.zeros({2, 1}), 0.5, g1, g2, 0.1), DomainError);
}

TEST(Losses, WordSparsityAndCombination) {
  Graph g;
  const std::vector<std::vector<Var>> words{scalars(g, {0.1, 0.2}), scalars(g, {0.3})};
  const Var w = word_sparsity_loss(g, words);
  EXPECT_NEAR(g.scalar(w), 0.6, 1e-15);
  BabiLossParts parts{g.constant(Tensor::matrix({{2.0}})), g.constant(Tensor::matrix({{3.0}})), w};
  BabiLossConfig cfg;
  cfg.lambda_fact = 0.5;
  cfg.lambda_word = 0.1;
  EXPECT_NEAR(g.scalar(combined_babi_loss(g, parts, cfg)), 2.0 + 1.5 + 0.06, 1e-15);
}

TEST(Losses, BabiConfigValidation) {
  BabiLossConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.mu_unsupporting, 0.1);
  c.margin = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.lambda_fact = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Losses, GradientOfPenaltyIsLambdaPerGate) {
  Parameter p("g", Tensor::matrix({{0.3}}));
  Graph g;
  const std::vector<Var> gates{g.param(p), g.param(p)};
  g.backward(sparsity_penalty(g, gates, 0.25));
  EXPECT_DOUBLE_EQ(p.grad[0], 0.5);
}
