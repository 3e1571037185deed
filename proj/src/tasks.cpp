#include "occamnet/tasks.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace occamnet {

namespace {

std::vector<Var> embed(Graph& g, Parameter& embeddings, std::span<const TokenId> tokens) {
  std::vector<Var> out;
  out.reserve(tokens.size());
  for (TokenId t : tokens) out.push_back(g.row(embeddings, t));
  return out;
}

double sum_of(std::span<const double> xs) { return std::accumulate(xs.begin(), xs.end(), 0.0); }

void check_index(std::size_t index, std::size_t size, Split split) {
  if (index >= size) {
    throw std::out_of_range("example " + std::to_string(index) + " outside " + split_name(split) + " split of " +
                            std::to_string(size));
  }
}

std::string join_tokens(const Tokens& tokens) {
  std::string s;
  for (std::size_t i = 0; i < tokens.size(); ++i) s += (i ? " " : "") + tokens[i];
  return s;
}

RecurrentEncoder make_encoder(const std::string& prefix, std::size_t input, std::size_t hidden, std::size_t layers,
                              bool gated, GateKind kind, RngStream& rng) {
  return gated ? RecurrentEncoder::gated(prefix, input, hidden, layers, kind, rng)
               : RecurrentEncoder::lstm(prefix, input, hidden, layers, rng);
}

}  // namespace

// ---- classification ----

ClassifierParams ClassifierParams::create(const ClassifierConfig& config, RngStream& rng) {
  if (config.vocab_size == 0 || config.classes < 2) throw std::invalid_argument("classifier: bad vocabulary or classes");
  ClassifierParams p;
  p.config = config;
  p.embeddings = {"embeddings", uniform_init(config.vocab_size, config.embed_dim, rng)};
  p.encoder = make_encoder("encoder", config.embed_dim, config.hidden, config.layers, config.gated, config.gate, rng);
  p.out_w = {"classifier.W", uniform_init(config.classes, config.hidden, rng)};
  p.out_b = {"classifier.b", Tensor(config.classes, 1)};
  return p;
}

ParameterRefs ClassifierParams::parameters() {
  ParameterRefs out{&embeddings};
  encoder.collect(out);
  out.push_back(&out_w);
  out.push_back(&out_b);
  return out;
}

ClassifierForward classify(Graph& g, ClassifierParams& params, std::span<const TokenId> tokens,
                           RngStream* dropout_rng) {
  const auto inputs = embed(g, params.embeddings, tokens);
  SequenceRun run = run_sequence(g, params.encoder, inputs, {params.config.dropout, dropout_rng});
  const Var scores = g.add(g.matmul(g.param(params.out_w), run.top()), g.param(params.out_b));
  return {scores, std::move(run)};
}

ClassificationTask::ClassificationTask(ClassifierParams params, Vocabulary vocab, Splits<LabeledSequence> data)
    : params_(std::move(params)), vocab_(std::move(vocab)), data_(std::move(data)) {
  if (params_.embeddings.value.rows() != vocab_.size()) {
    throw std::invalid_argument("classification: vocabulary of " + std::to_string(vocab_.size()) +
                                " tokens does not match embedding table of " +
                                std::to_string(params_.embeddings.value.rows()));
  }
}

ExampleLoss ClassificationTask::example_loss(Graph& g, std::size_t index, const LossWeights& weights,
                                             RngStream* dropout_rng) {
  check_index(index, data_.train.size(), Split::kTrain);
  const LabeledSequence& ex = data_.train[index];
  const ClassifierForward fwd = classify(g, params_, ex.tokens, dropout_rng);
  const Var task = sentiment_loss(g, fwd.scores, ex.label);
  const Var penalty = sparsity_penalty(g, fwd.run.gates, weights.lambda);
  ExampleLoss out;
  out.total = g.add(task, penalty);
  out.task = g.scalar(task);
  out.penalty = g.scalar(penalty);
  out.gate_sum = sum_of(fwd.run.gate_values);
  out.gate_count = fwd.run.gate_values.size();
  return out;
}

Metrics ClassificationTask::evaluate(Split split) {
  const auto& rows = data_.get(split);
  Metrics m;
  m.examples = rows.size();
  std::size_t correct = 0;
  double gate_sum = 0.0;
  std::size_t gate_count = 0;
  for (const auto& ex : rows) {
    eval_graph_.clear();
    const ClassifierForward fwd = classify(eval_graph_, params_, ex.tokens);
    const View s = eval_graph_.value(fwd.scores);
    std::size_t best = 0;
    for (std::size_t c = 1; c < s.size(); ++c)
      if (s[c] > s[best]) best = c;
    if (best == ex.label) ++correct;
    gate_sum += sum_of(fwd.run.gate_values);
    gate_count += fwd.run.gate_values.size();
  }
  m.accuracy = rows.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(rows.size());
  m.mean_gate = gate_count ? gate_sum / static_cast<double>(gate_count) : 0.0;
  return m;
}

double ClassificationTask::mean_gate_where(Split split, const std::function<bool(TokenId)>& select) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& ex : data_.get(split)) {
    eval_graph_.clear();
    const ClassifierForward fwd = classify(eval_graph_, params_, ex.tokens);
    for (std::size_t t = 0; t < fwd.run.gate_values.size(); ++t) {
      if (select(ex.tokens[t])) {
        sum += fwd.run.gate_values[t];
        ++count;
      }
    }
  }
  return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

GateTrace ClassificationTask::trace(Split split, std::size_t index) {
  const auto& rows = data_.get(split);
  check_index(index, rows.size(), split);
  if (!params_.encoder.is_gated()) throw std::invalid_argument("trace: model has no gates");
  const LabeledSequence& ex = rows[index];
  eval_graph_.clear();
  const ClassifierForward fwd = classify(eval_graph_, params_, ex.tokens);
  GateTrace trace;
  for (std::size_t t = 0; t < ex.tokens.size(); ++t) trace.units.push_back({vocab_.token(ex.tokens[t]), fwd.run.gate_values[t]});
  const View s = eval_graph_.value(fwd.scores);
  std::size_t best = 0;
  for (std::size_t c = 1; c < s.size(); ++c)
    if (s[c] > s[best]) best = c;
  trace.meta.example = std::string(split_name(split)) + "/" + std::to_string(index);
  trace.meta.notes.push_back("label: " + std::to_string(ex.label) + " | predicted: " + std::to_string(best));
  return trace;
}

// ---- paraphrase ----

PairParams PairParams::create(const PairModelConfig& config, RngStream& rng) {
  if (config.vocab_size == 0) throw std::invalid_argument("pair model: empty vocabulary");
  PairParams p;
  p.config = config;
  p.embeddings = {"embeddings", uniform_init(config.vocab_size, config.embed_dim, rng)};
  p.encoder_a = make_encoder("encoder_a", config.embed_dim, config.hidden, config.layers, config.gated, config.gate, rng);
  p.encoder_b = make_encoder("encoder_b", config.embed_dim, config.hidden, config.layers, config.gated, config.gate, rng);
  return p;
}

ParameterRefs PairParams::parameters() {
  ParameterRefs out{&embeddings};
  encoder_a.collect(out);
  encoder_b.collect(out);
  return out;
}

Metrics pair_metrics(std::span<const double> predicted, std::span<const double> targets, double threshold) {
  if (predicted.size() != targets.size()) throw std::invalid_argument("pair_metrics: length mismatch");
  Metrics m;
  m.examples = predicted.size();
  m.has_recall = true;
  std::size_t agree = 0, tp = 0, fn = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] >= threshold;
    const bool t = targets[i] >= threshold;
    if (p == t) ++agree;
    if (t && p) ++tp;
    if (t && !p) ++fn;
  }
  m.accuracy = predicted.empty() ? 0.0 : static_cast<double>(agree) / static_cast<double>(predicted.size());
  m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  return m;
}

ParaphraseTask::ParaphraseTask(PairParams params, Vocabulary vocab, Splits<ParaphrasePair> data)
    : params_(std::move(params)), vocab_(std::move(vocab)), data_(std::move(data)) {
  if (params_.embeddings.value.rows() != vocab_.size()) {
    throw std::invalid_argument("paraphrase: vocabulary does not match embedding table");
  }
}

namespace {

struct PairForward {
  Var cosine;
  SequenceRun a;
  SequenceRun b;
};

PairForward pair_forward(Graph& g, PairParams& p, const ParaphrasePair& ex, RngStream* rng) {
  const auto ia = embed(g, p.embeddings, ex.a);
  const auto ib = embed(g, p.embeddings, ex.b);
  SequenceRun ra = run_sequence(g, p.encoder_a, ia, {p.config.dropout, rng});
  SequenceRun rb = run_sequence(g, p.encoder_b, ib, {p.config.dropout, rng});
  const Var c = g.cosine(ra.top(), rb.top());
  return {c, std::move(ra), std::move(rb)};
}

}  // namespace

ExampleLoss ParaphraseTask::example_loss(Graph& g, std::size_t index, const LossWeights& weights,
                                         RngStream* dropout_rng) {
  check_index(index, data_.train.size(), Split::kTrain);
  const ParaphrasePair& ex = data_.train[index];
  const PairForward fwd = pair_forward(g, params_, ex, dropout_rng);
  const Var total = paraphrase_loss(g, fwd.a.top(), fwd.b.top(), ex.target, fwd.a.gates, fwd.b.gates, weights.lambda);
  ExampleLoss out;
  out.total = total;
  const double gates = sum_of(fwd.a.gate_values) + sum_of(fwd.b.gate_values);
  out.penalty = weights.lambda * gates;
  out.task = g.scalar(total) - out.penalty;
  out.gate_sum = gates;
  out.gate_count = fwd.a.gate_values.size() + fwd.b.gate_values.size();
  return out;
}

Metrics ParaphraseTask::evaluate(Split split) {
  const auto& rows = data_.get(split);
  std::vector<double> predicted, targets;
  double gate_sum = 0.0;
  std::size_t gate_count = 0;
  for (const auto& ex : rows) {
    eval_graph_.clear();
    const PairForward fwd = pair_forward(eval_graph_, params_, ex, nullptr);
    predicted.push_back(eval_graph_.scalar(fwd.cosine));
    targets.push_back(ex.target);
    gate_sum += sum_of(fwd.a.gate_values) + sum_of(fwd.b.gate_values);
    gate_count += fwd.a.gate_values.size() + fwd.b.gate_values.size();
  }
  Metrics m = pair_metrics(predicted, targets, params_.config.threshold);
  m.mean_gate = gate_count ? gate_sum / static_cast<double>(gate_count) : 0.0;
  return m;
}

GateTrace ParaphraseTask::trace(Split split, std::size_t index) {
  const auto& rows = data_.get(split);
  check_index(index, rows.size(), split);
  if (!params_.encoder_a.is_gated()) throw std::invalid_argument("trace: model has no gates");
  const ParaphrasePair& ex = rows[index];
  eval_graph_.clear();
  const PairForward fwd = pair_forward(eval_graph_, params_, ex, nullptr);
  GateTrace trace;
  for (std::size_t t = 0; t < ex.a.size(); ++t) trace.units.push_back({vocab_.token(ex.a[t]), fwd.a.gate_values[t]});
  for (std::size_t t = 0; t < ex.b.size(); ++t) trace.units.push_back({vocab_.token(ex.b[t]), fwd.b.gate_values[t]});
  trace.groups.push_back({0, ex.a.size(), std::nullopt});
  trace.groups.push_back({ex.a.size(), ex.b.size(), std::nullopt});
  char buf[96];
  std::snprintf(buf, sizeof buf, "target: %.4f | cosine: %.4f", ex.target, eval_graph_.scalar(fwd.cosine));
  trace.meta.example = std::string(split_name(split)) + "/" + std::to_string(index);
  trace.meta.notes.push_back(buf);
  return trace;
}

// ---- story QA ----

bool answer_matches(std::span<const TokenId> predicted, std::span<const TokenId> answer) {
  return std::equal(predicted.begin(), predicted.end(), answer.begin(), answer.end());
}

namespace {

TokenIds with_eos(const TokenIds& answer) {
  TokenIds target = answer;
  target.push_back(Vocabulary::kEos);
  return target;
}

}  // namespace

ExampleLoss hg_story_loss(Graph& g, HgLstmParams& params, const Story& story, const BabiLossConfig& cfg,
                          double lambda_word, RngStream* dropout_rng) {
  const StoryEncoding enc = encode_story(g, params, story, {dropout_rng});
  const TokenIds target = with_eos(story.answer);
  const auto scores = decode_teacher_forced(g, params.decoder, params.embeddings, enc.hl_final, story.answer);
  BabiLossParts parts;
  parts.prediction = margin_prediction_loss(g, scores, target, cfg.margin);
  parts.fact = fact_selection_loss(g, enc.fact_gates, story.supporting, cfg.mu_unsupporting);
  parts.word = word_sparsity_loss(g, enc.word_gates);
  BabiLossConfig weighted = cfg;
  weighted.lambda_word = lambda_word;

  ExampleLoss out;
  out.total = combined_babi_loss(g, parts, weighted);
  out.task = g.scalar(parts.prediction);
  out.penalty = g.scalar(out.total) - out.task;
  for (const auto& fact : enc.word_gate_values) {
    out.gate_sum += sum_of(fact);
    out.gate_count += fact.size();
  }
  return out;
}

HgLstmTask::HgLstmTask(HgLstmParams params, Vocabulary vocab, Splits<Story> data, std::size_t max_answer_len)
    : params_(std::move(params)), vocab_(std::move(vocab)), data_(std::move(data)), max_answer_len_(max_answer_len) {
  if (params_.embeddings.value.rows() != vocab_.size()) {
    throw std::invalid_argument("babi: vocabulary does not match embedding table");
  }
}

ExampleLoss HgLstmTask::example_loss(Graph& g, std::size_t index, const LossWeights& weights,
                                     RngStream* dropout_rng) {
  check_index(index, data_.train.size(), Split::kTrain);
  return hg_story_loss(g, params_, data_.train[index], weights.babi, weights.lambda, dropout_rng);
}

Metrics HgLstmTask::evaluate(Split split) {
  const auto& rows = data_.get(split);
  Metrics m;
  m.examples = rows.size();
  std::size_t correct = 0;
  double gate_sum = 0.0;
  std::size_t gate_count = 0;
  for (const auto& story : rows) {
    eval_graph_.clear();
    const StoryEncoding enc = encode_story(eval_graph_, params_, story);
    const Decoded dec = decode_answer(eval_graph_, params_, enc.hl_final, max_answer_len_ + 1);
    if (answer_matches(dec.tokens, story.answer)) ++correct;
    for (const auto& fact : enc.word_gate_values) {
      gate_sum += sum_of(fact);
      gate_count += fact.size();
    }
  }
  m.accuracy = rows.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(rows.size());
  m.mean_gate = gate_count ? gate_sum / static_cast<double>(gate_count) : 0.0;
  return m;
}

GateTrace HgLstmTask::trace(Split split, std::size_t index) {
  const auto& rows = data_.get(split);
  check_index(index, rows.size(), split);
  const Story& story = rows[index];
  eval_graph_.clear();
  const StoryEncoding enc = encode_story(eval_graph_, params_, story);
  const Decoded dec = decode_answer(eval_graph_, params_, enc.hl_final, max_answer_len_ + 1);
  GateTrace trace;
  for (std::size_t f = 0; f < story.facts.size(); ++f) {
    trace.groups.push_back({trace.units.size(), story.facts[f].size(), enc.fact_gate_values[f]});
    for (std::size_t w = 0; w < story.facts[f].size(); ++w) {
      trace.units.push_back({vocab_.token(story.facts[f][w]), enc.word_gate_values[f][w]});
    }
  }
  trace.meta.example = std::string(split_name(split)) + "/" + std::to_string(index);
  trace.meta.notes.push_back("question: " + join_tokens(vocab_.decode(story.question)));
  trace.meta.notes.push_back("answer: " + join_tokens(vocab_.decode(story.answer)));
  trace.meta.notes.push_back("predicted: " + join_tokens(vocab_.decode(dec.tokens)));
  return trace;
}

LstmReaderTask::LstmReaderTask(LstmReaderParams params, Vocabulary vocab, Splits<Story> data,
                               std::size_t max_answer_len)
    : params_(std::move(params)), vocab_(std::move(vocab)), data_(std::move(data)), max_answer_len_(max_answer_len) {
  if (params_.embeddings.value.rows() != vocab_.size()) {
    throw std::invalid_argument("babi: vocabulary does not match embedding table");
  }
}

ExampleLoss LstmReaderTask::example_loss(Graph& g, std::size_t index, const LossWeights& weights,
                                         RngStream* dropout_rng) {
  check_index(index, data_.train.size(), Split::kTrain);
  const Story& story = data_.train[index];
  const Var context = read_story(g, params_, story, dropout_rng);
  const auto scores = decode_teacher_forced(g, params_.decoder, params_.embeddings, context, story.answer);
  ExampleLoss out;
  out.total = margin_prediction_loss(g, scores, with_eos(story.answer), weights.babi.margin);
  out.task = g.scalar(out.total);
  return out;
}

Metrics LstmReaderTask::evaluate(Split split) {
  const auto& rows = data_.get(split);
  Metrics m;
  m.examples = rows.size();
  std::size_t correct = 0;
  for (const auto& story : rows) {
    eval_graph_.clear();
    const Var context = read_story(eval_graph_, params_, story);
    const Decoded dec = decode_greedy(eval_graph_, params_.decoder, params_.embeddings, context, max_answer_len_ + 1);
    if (answer_matches(dec.tokens, story.answer)) ++correct;
  }
  m.accuracy = rows.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(rows.size());
  return m;
}

GateTrace LstmReaderTask::trace(Split, std::size_t) {
  throw std::invalid_argument("trace: the LSTM reader has no gates");
}

}  // namespace occamnet
