#include "occamnet/hierarchical.hpp"

#include <stdexcept>

namespace occamnet {

namespace {

std::vector<Var> embed(Graph& g, Parameter& embeddings, std::span<const TokenId> tokens) {
  std::vector<Var> out;
  out.reserve(tokens.size());
  for (TokenId t : tokens) out.push_back(g.row(embeddings, t));
  return out;
}

Var project(Graph& g, Parameter& w, Parameter& b, Var x) { return g.add(g.matmul(g.param(w), x), g.param(b)); }

std::size_t argmax_lowest(View scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

LstmState decoder_start(Graph& g, AnswerDecoder& dec, Var context) {
  return {project(g, dec.init_m_w, dec.init_m_b, context), project(g, dec.init_y_w, dec.init_y_b, context)};
}

}  // namespace

AnswerDecoder AnswerDecoder::create(const std::string& prefix, std::size_t context, std::size_t embed,
                                    std::size_t hidden, std::size_t vocab, RngStream& rng) {
  AnswerDecoder d;
  d.cell = LstmParams::create(prefix + ".cell", embed, hidden, rng);
  d.init_m_w = {prefix + ".init_m.W", uniform_init(hidden, context, rng)};
  d.init_m_b = {prefix + ".init_m.b", Tensor(hidden, 1)};
  d.init_y_w = {prefix + ".init_y.W", uniform_init(hidden, context, rng)};
  d.init_y_b = {prefix + ".init_y.b", Tensor(hidden, 1)};
  d.out_w = {prefix + ".out.W", uniform_init(vocab, hidden, rng)};
  d.out_b = {prefix + ".out.b", Tensor(vocab, 1)};
  return d;
}

void AnswerDecoder::collect(ParameterRefs& out) {
  cell.collect(out);
  for (Parameter* p : {&init_m_w, &init_m_b, &init_y_w, &init_y_b, &out_w, &out_b}) out.push_back(p);
}

Decoded decode_greedy(Graph& g, AnswerDecoder& dec, Parameter& embeddings, Var context, std::size_t max_len) {
  if (max_len < 1) throw std::invalid_argument("decode: max_len must be >= 1");
  Decoded out;
  LstmState state = decoder_start(g, dec, context);
  Var input = g.zeros({embeddings.value.cols(), 1});
  for (std::size_t step = 0; step < max_len; ++step) {
    state = lstm_step(g, dec.cell, input, state).state;
    const Var scores = project(g, dec.out_w, dec.out_b, state.y);
    out.scores.push_back(scores);
    const TokenId next = argmax_lowest(g.value(scores));
    if (next == Vocabulary::kEos) return out;
    out.tokens.push_back(next);
    input = g.row(embeddings, next);
  }
  out.truncated = true;
  return out;
}

std::vector<Var> decode_teacher_forced(Graph& g, AnswerDecoder& dec, Parameter& embeddings, Var context,
                                       std::span<const TokenId> target) {
  std::vector<Var> scores;
  scores.reserve(target.size() + 1);
  LstmState state = decoder_start(g, dec, context);
  Var input = g.zeros({embeddings.value.cols(), 1});
  for (std::size_t step = 0; step <= target.size(); ++step) {
    state = lstm_step(g, dec.cell, input, state).state;
    scores.push_back(project(g, dec.out_w, dec.out_b, state.y));
    if (step < target.size()) input = g.row(embeddings, target[step]);
  }
  return scores;
}

HgLstmParams HgLstmParams::create(const HgLstmConfig& config, RngStream& rng) {
  if (config.vocab_size <= Vocabulary::kFirstRegular) throw std::invalid_argument("HgLstm: vocabulary too small");
  if (config.question_first && config.use_question_state) {
    throw std::invalid_argument("HgLstm: question_first and use_question_state are exclusive");
  }
  HgLstmParams p;
  p.config = config;
  p.embeddings = {"embeddings", uniform_init(config.vocab_size, config.embed_dim, rng)};
  p.fact_model = RecurrentEncoder::gated("fact", config.embed_dim, config.fact_hidden, 1, config.gate, rng);
  p.question_model = RecurrentEncoder::gated("question", config.embed_dim, config.fact_hidden, 1, config.gate, rng);
  p.hl_model =
      RecurrentEncoder::gated("hl", config.hl_input_size(), config.hl_hidden, config.hl_layers, config.gate, rng);
  p.decoder = AnswerDecoder::create("decoder", config.hl_hidden, config.embed_dim, config.decoder_hidden,
                                    config.vocab_size, rng);
  return p;
}

ParameterRefs HgLstmParams::parameters() {
  ParameterRefs out{&embeddings};
  fact_model.collect(out);
  if (config.use_question_state || config.question_first) question_model.collect(out);
  hl_model.collect(out);
  decoder.collect(out);
  return out;
}

FactEncoding encode_fact(Graph& g, HgLstmParams& params, std::span<const TokenId> tokens, HgDropout dropout) {
  if (tokens.empty()) throw std::invalid_argument("encode_fact: empty fact");
  const auto inputs = embed(g, params.embeddings, tokens);
  SequenceRun run = run_sequence(g, params.fact_model, inputs, {params.config.dropout_fact, dropout.rng});
  return {run.top(), std::move(run.gates), std::move(run.gate_values)};
}

QuestionEncoding encode_question(Graph& g, HgLstmParams& params, std::span<const TokenId> tokens,
                                 HgDropout dropout) {
  if (tokens.empty()) throw std::invalid_argument("encode_question: empty question");
  const auto inputs = embed(g, params.embeddings, tokens);
  const Var q_avg = g.scale(g.add_n(inputs), 1.0 / static_cast<double>(inputs.size()));
  SequenceRun run = run_sequence(g, params.question_model, inputs, {params.config.dropout_question, dropout.rng});
  return {run.top(), q_avg};
}

StoryEncoding encode_story(Graph& g, HgLstmParams& params, const Story& story, HgDropout dropout) {
  if (story.facts.empty()) throw std::invalid_argument("encode_story: story has no facts");
  if (story.question.empty()) throw std::invalid_argument("encode_story: empty question");
  StoryEncoding enc;

  Var q_avg;
  Var q_final;
  if (params.config.use_question_state || params.config.question_first) {
    const QuestionEncoding q = encode_question(g, params, story.question, dropout);
    q_avg = q.q_avg;
    q_final = q.q_final;
  } else {
    const auto words = embed(g, params.embeddings, story.question);
    q_avg = g.scale(g.add_n(words), 1.0 / static_cast<double>(words.size()));
  }

  std::vector<Var> hl_inputs;
  hl_inputs.reserve(story.facts.size() + 1);
  if (params.config.question_first) {
    const Var parts[] = {q_avg, q_final};
    hl_inputs.push_back(g.concat_rows(parts));
  }
  for (const auto& fact : story.facts) {
    FactEncoding f = encode_fact(g, params, fact, dropout);
    enc.fact_vectors.push_back(f.vector);
    enc.word_gates.push_back(std::move(f.word_gates));
    enc.word_gate_values.push_back(std::move(f.word_gate_values));
    if (params.config.use_question_state) {
      const Var parts[] = {q_avg, q_final, f.vector};
      hl_inputs.push_back(g.concat_rows(parts));
    } else {
      const Var parts[] = {q_avg, f.vector};
      hl_inputs.push_back(g.concat_rows(parts));
    }
  }
  SequenceRun run = run_sequence(g, params.hl_model, hl_inputs, {params.config.dropout_hl, dropout.rng});
  if (params.config.question_first) {
    enc.question_gate = run.gates.front();
    run.gates.erase(run.gates.begin());
    run.gate_values.erase(run.gate_values.begin());
  }
  enc.fact_gates = std::move(run.gates);
  enc.fact_gate_values = std::move(run.gate_values);
  enc.hl_final = run.top();
  return enc;
}

Decoded decode_answer(Graph& g, HgLstmParams& params, Var hl_final, std::size_t max_len) {
  return decode_greedy(g, params.decoder, params.embeddings, hl_final, max_len);
}

LstmReaderParams LstmReaderParams::create(const LstmReaderConfig& config, RngStream& rng) {
  if (config.vocab_size <= Vocabulary::kFirstRegular) throw std::invalid_argument("LstmReader: vocabulary too small");
  LstmReaderParams p;
  p.config = config;
  p.embeddings = {"embeddings", uniform_init(config.vocab_size, config.embed_dim, rng)};
  p.reader = RecurrentEncoder::lstm("reader", config.embed_dim, config.hidden, config.layers, rng);
  p.decoder =
      AnswerDecoder::create("decoder", config.hidden, config.embed_dim, config.decoder_hidden, config.vocab_size, rng);
  return p;
}

ParameterRefs LstmReaderParams::parameters() {
  ParameterRefs out{&embeddings};
  reader.collect(out);
  decoder.collect(out);
  return out;
}

Var read_story(Graph& g, LstmReaderParams& params, const Story& story, RngStream* dropout_rng) {
  TokenIds all;
  for (const auto& fact : story.facts) all.insert(all.end(), fact.begin(), fact.end());
  all.insert(all.end(), story.question.begin(), story.question.end());
  const auto inputs = embed(g, params.embeddings, all);
  return run_sequence(g, params.reader, inputs, {params.config.dropout, dropout_rng}).top();
}

}  // namespace occamnet
