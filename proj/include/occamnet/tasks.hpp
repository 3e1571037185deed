#pragma once

// Concrete models bound to their data: sequence classification (sentiment
// and the synthetic needle task), paraphrase scoring, and story QA with
// either the hierarchical gated model or a plain LSTM reader.

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "occamnet/cells.hpp"
#include "occamnet/data.hpp"
#include "occamnet/hierarchical.hpp"
#include "occamnet/training.hpp"

namespace occamnet {

template <typename T>
struct Splits {
  std::vector<T> train;
  std::vector<T> validation;
  std::vector<T> test;

  const std::vector<T>& get(Split s) const {
    switch (s) {
      case Split::kTrain: return train;
      case Split::kValidation: return validation;
      case Split::kTest: return test;
    }
    return train;
  }
};

// ---- sequence classification ----

struct ClassifierConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 100;
  std::size_t hidden = 50;
  std::size_t layers = 1;
  bool gated = true;
  GateKind gate = GateKind::kLinear;
  std::size_t classes = kSentimentClasses;
  double dropout = 0.3;
};

/// Reads the sequence and classifies its last hidden state with softmax.
struct ClassifierParams {
  ClassifierConfig config;
  Parameter embeddings;
  RecurrentEncoder encoder;
  Parameter out_w;
  Parameter out_b;

  static ClassifierParams create(const ClassifierConfig& config, RngStream& rng);
  ParameterRefs parameters();
};

struct ClassifierForward {
  Var scores;
  SequenceRun run;
};

ClassifierForward classify(Graph& g, ClassifierParams& params, std::span<const TokenId> tokens,
                           RngStream* dropout_rng = nullptr);

class ClassificationTask final : public Task {
 public:
  ClassificationTask(ClassifierParams params, Vocabulary vocab, Splits<LabeledSequence> data);

  ParameterRefs parameters() override { return params_.parameters(); }
  std::size_t size(Split split) const override { return data_.get(split).size(); }
  ExampleLoss example_loss(Graph& g, std::size_t index, const LossWeights& weights, RngStream* dropout_rng) override;
  Metrics evaluate(Split split) override;
  GateTrace trace(Split split, std::size_t index) override;

  /// Mean gate over every position whose token satisfies `select`; NaN when
  /// no position qualifies or the model is ungated.
  double mean_gate_where(Split split, const std::function<bool(TokenId)>& select);

  ClassifierParams& params() { return params_; }
  const Vocabulary& vocab() const { return vocab_; }

 private:
  ClassifierParams params_;
  Vocabulary vocab_;
  Splits<LabeledSequence> data_;
  Graph eval_graph_;
};

// ---- paraphrase ----

struct PairModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 100;
  std::size_t hidden = 50;
  std::size_t layers = 1;
  bool gated = true;
  GateKind gate = GateKind::kLinear;
  double dropout = 0.3;
  /// Cosine at or above this counts as a predicted paraphrase; targets at or
  /// above it count as true paraphrases.
  double threshold = 0.5;
};

/// Two separate encoders, one per sentence, compared by cosine.
struct PairParams {
  PairModelConfig config;
  Parameter embeddings;
  RecurrentEncoder encoder_a;
  RecurrentEncoder encoder_b;

  static PairParams create(const PairModelConfig& config, RngStream& rng);
  ParameterRefs parameters();
};

class ParaphraseTask final : public Task {
 public:
  ParaphraseTask(PairParams params, Vocabulary vocab, Splits<ParaphrasePair> data);

  ParameterRefs parameters() override { return params_.parameters(); }
  std::size_t size(Split split) const override { return data_.get(split).size(); }
  ExampleLoss example_loss(Graph& g, std::size_t index, const LossWeights& weights, RngStream* dropout_rng) override;
  Metrics evaluate(Split split) override;
  GateTrace trace(Split split, std::size_t index) override;

  PairParams& params() { return params_; }

 private:
  PairParams params_;
  Vocabulary vocab_;
  Splits<ParaphrasePair> data_;
  Graph eval_graph_;
};

/// Accuracy and recall of thresholded predictions against thresholded targets.
Metrics pair_metrics(std::span<const double> predicted, std::span<const double> targets, double threshold);

// ---- story QA ----

/// Exact match of the full answer sequence.
bool answer_matches(std::span<const TokenId> predicted, std::span<const TokenId> answer);

class HgLstmTask final : public Task {
 public:
  HgLstmTask(HgLstmParams params, Vocabulary vocab, Splits<Story> data, std::size_t max_answer_len);

  ParameterRefs parameters() override { return params_.parameters(); }
  std::size_t size(Split split) const override { return data_.get(split).size(); }
  ExampleLoss example_loss(Graph& g, std::size_t index, const LossWeights& weights, RngStream* dropout_rng) override;
  Metrics evaluate(Split split) override;
  GateTrace trace(Split split, std::size_t index) override;

  HgLstmParams& params() { return params_; }
  const Vocabulary& vocab() const { return vocab_; }

 private:
  HgLstmParams params_;
  Vocabulary vocab_;
  Splits<Story> data_;
  std::size_t max_answer_len_;
  Graph eval_graph_;
};

/// The training objective of one story under the hierarchical model;
/// `lambda_word` overrides weights.babi.lambda_word.
ExampleLoss hg_story_loss(Graph& g, HgLstmParams& params, const Story& story, const BabiLossConfig& cfg,
                          double lambda_word, RngStream* dropout_rng);

class LstmReaderTask final : public Task {
 public:
  LstmReaderTask(LstmReaderParams params, Vocabulary vocab, Splits<Story> data, std::size_t max_answer_len);

  ParameterRefs parameters() override { return params_.parameters(); }
  std::size_t size(Split split) const override { return data_.get(split).size(); }
  ExampleLoss example_loss(Graph& g, std::size_t index, const LossWeights& weights, RngStream* dropout_rng) override;
  Metrics evaluate(Split split) override;
  GateTrace trace(Split split, std::size_t index) override;

 private:
  LstmReaderParams params_;
  Vocabulary vocab_;
  Splits<Story> data_;
  std::size_t max_answer_len_;
  Graph eval_graph_;
};

}  // namespace occamnet
