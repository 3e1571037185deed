#pragma once

// Hierarchical gated LSTM for story question answering.
//
// Each fact's words are embedded and read by a word-gated Fact model; its
// final hidden state is the fact vector. The High-Level model, a gated
// stacked LSTM, reads one input per fact: the mean question embedding
// concatenated with the fact vector. Its gate therefore sees the question
// and can switch whole facts off. The top hidden state after the last fact
// seeds an LSTM decoder that emits answer tokens until <EOS>.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "occamnet/cells.hpp"
#include "occamnet/data.hpp"

namespace occamnet {

struct HgLstmConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 50;
  std::size_t fact_hidden = 30;
  std::size_t hl_hidden = 20;
  std::size_t hl_layers = 6;
  std::size_t decoder_hidden = 20;
  GateKind gate = GateKind::kQuad;
  /// Also feed the question model's final state into the High-Level input.
  bool use_question_state = false;
  /// Give the High-Level model a leading question step [q_avg || q_final]
  /// before the facts. Excludes use_question_state.
  bool question_first = false;
  double dropout_fact = 0.3;
  double dropout_question = 0.3;
  double dropout_hl = 0.5;

  std::size_t hl_input_size() const { return embed_dim + fact_hidden + (use_question_state ? fact_hidden : 0); }
};

/// LSTM decoder whose initial (m, y) are affine maps of a context vector and
/// whose per-step input is the previous token's embedding (zeros at step 0).
struct AnswerDecoder {
  LstmParams cell;
  Parameter init_m_w, init_m_b;
  Parameter init_y_w, init_y_b;
  Parameter out_w, out_b;

  static AnswerDecoder create(const std::string& prefix, std::size_t context, std::size_t embed, std::size_t hidden,
                              std::size_t vocab, RngStream& rng);
  void collect(ParameterRefs& out);
};

struct Decoded {
  TokenIds tokens;
  /// Raw score vectors s(w), one per emitted position including the <EOS> step.
  std::vector<Var> scores;
  /// max_len was reached before <EOS>.
  bool truncated = false;
};

/// Greedy decoding; ties resolve to the lowest token id. <EOS> ends the
/// answer and is not part of `tokens`. max_len must be >= 1.
Decoded decode_greedy(Graph& g, AnswerDecoder& dec, Parameter& embeddings, Var context, std::size_t max_len);
/// Score vectors under teacher forcing for target followed by <EOS>.
std::vector<Var> decode_teacher_forced(Graph& g, AnswerDecoder& dec, Parameter& embeddings, Var context,
                                       std::span<const TokenId> target);

struct HgLstmParams {
  HgLstmConfig config;
  Parameter embeddings;
  RecurrentEncoder fact_model;
  RecurrentEncoder question_model;
  RecurrentEncoder hl_model;
  AnswerDecoder decoder;

  static HgLstmParams create(const HgLstmConfig& config, RngStream& rng);
  ParameterRefs parameters();
};

/// Dropout streams for one story pass. Inactive when rng is null.
struct HgDropout {
  RngStream* rng = nullptr;
};

struct FactEncoding {
  Var vector;
  std::vector<Var> word_gates;
  std::vector<double> word_gate_values;
};

struct QuestionEncoding {
  Var q_final;
  Var q_avg;
};

struct StoryEncoding {
  std::vector<Var> fact_vectors;
  std::vector<std::vector<Var>> word_gates;
  std::vector<std::vector<double>> word_gate_values;
  std::vector<Var> fact_gates;
  std::vector<double> fact_gate_values;
  /// Gate of the leading question step, when there is one.
  std::optional<Var> question_gate;
  Var hl_final;
};

FactEncoding encode_fact(Graph& g, HgLstmParams& params, std::span<const TokenId> tokens, HgDropout dropout = {});
QuestionEncoding encode_question(Graph& g, HgLstmParams& params, std::span<const TokenId> tokens,
                                 HgDropout dropout = {});
StoryEncoding encode_story(Graph& g, HgLstmParams& params, const Story& story, HgDropout dropout = {});
Decoded decode_answer(Graph& g, HgLstmParams& params, Var hl_final, std::size_t max_len);

/// Plain (ungated) LSTM reader over all fact words followed by the question,
/// sharing the decoder design. The comparison baseline for story QA.
struct LstmReaderConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 50;
  std::size_t hidden = 50;
  std::size_t layers = 1;
  std::size_t decoder_hidden = 20;
  double dropout = 0.3;
};

struct LstmReaderParams {
  LstmReaderConfig config;
  Parameter embeddings;
  RecurrentEncoder reader;
  AnswerDecoder decoder;

  static LstmReaderParams create(const LstmReaderConfig& config, RngStream& rng);
  ParameterRefs parameters();
};

/// Final top hidden state after reading the story.
Var read_story(Graph& g, LstmReaderParams& params, const Story& story, RngStream* dropout_rng = nullptr);

}  // namespace occamnet
