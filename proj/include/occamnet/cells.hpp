#pragma once

// Vanilla LSTM, the gated ("Occam") LSTM and its stacked variant.
//
//   g  = f_gate(x_t, y_{t-1})            gated cells only, one scalar per step
//   x' = x_t * g
//   z  = tanh(W_z x' + R_z y_{t-1} + b_z)
//   i  = sigm(W_i x' + R_i y_{t-1} + b_i)
//   f  = sigm(W_f x' + R_f y_{t-1} + b_f)
//   o  = sigm(W_o x' + R_o y_{t-1} + b_o)
//   m  = i . z + f . m_{t-1}
//   y  = o . tanh(m)
//
// Gate functions:
//   linear: sigm(p.x + q.h + b)
//   quad:   sigm(h^T W x + p.x + q.h + b)

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "occamnet/dropout.hpp"
#include "occamnet/graph.hpp"
#include "occamnet/rng.hpp"

namespace occamnet {

enum class GateKind { kLinear, kQuad };

const char* gate_kind_name(GateKind kind);
GateKind parse_gate_kind(const std::string& text);

/// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] with fan_in = cols.
Tensor uniform_init(std::size_t rows, std::size_t cols, RngStream& rng);

struct LstmParams {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  Parameter w_z, w_i, w_f, w_o;
  Parameter r_z, r_i, r_f, r_o;
  Parameter b_z, b_i, b_f, b_o;

  /// Matrices uniform by fan-in, biases zero except the forget bias at 1.
  static LstmParams create(const std::string& prefix, std::size_t input, std::size_t hidden, RngStream& rng);
  void collect(ParameterRefs& out);
};

struct GateParams {
  GateKind kind = GateKind::kLinear;
  std::size_t input_size = 0;
  std::size_t cond_size = 0;
  Parameter p;       // [input x 1]
  Parameter q;       // [cond x 1]
  Parameter w_quad;  // [cond x input], empty for linear gates
  Parameter b;       // [1 x 1]

  static GateParams create(const std::string& prefix, GateKind kind, std::size_t input, std::size_t cond,
                           RngStream& rng);
  void collect(ParameterRefs& out);
};

struct LstmState {
  Var m;
  Var y;
};

struct StepOutput {
  LstmState state;
  std::optional<Var> gate;
};

LstmState zero_state(Graph& g, std::size_t hidden);

StepOutput lstm_step(Graph& g, LstmParams& params, Var x, const LstmState& prev);

/// Scalar gate in (0, 1) as a 1x1 node.
Var gate_activation(Graph& g, GateParams& gate, Var x, Var h);

/// Gate conditions on prev.y.
StepOutput gated_lstm_step(Graph& g, LstmParams& params, GateParams& gate, Var x, const LstmState& prev);

struct StackedStep {
  std::vector<LstmState> states;
  Var gate;
};

/// One gate from (x, top layer's previous y) scales the bottom layer's input;
/// each higher layer reads the output of the layer below at the same step.
/// `between` is applied to the inputs of layers 2..n.
StackedStep stacked_gated_step(Graph& g, std::span<LstmParams> layers, GateParams& gate, Var x,
                               std::span<const LstmState> prev, const Dropout& between = {});

/// An LSTM stack with an optional Occam gate on the bottom layer's input.
struct RecurrentEncoder {
  std::vector<LstmParams> layers;
  std::optional<GateParams> gate;

  static RecurrentEncoder lstm(const std::string& prefix, std::size_t input, std::size_t hidden, std::size_t depth,
                               RngStream& rng);
  /// Gated stack; depth 1 gives the plain gated LSTM.
  static RecurrentEncoder gated(const std::string& prefix, std::size_t input, std::size_t hidden, std::size_t depth,
                                GateKind kind, RngStream& rng);

  bool is_gated() const { return gate.has_value(); }
  std::size_t input_size() const { return layers.front().input_size; }
  std::size_t hidden_size() const { return layers.back().hidden_size; }
  std::size_t depth() const { return layers.size(); }
  void collect(ParameterRefs& out);
};

struct SequenceRun {
  std::vector<LstmState> final_states;
  /// One 1x1 node per step; empty for ungated encoders.
  std::vector<Var> gates;
  std::vector<double> gate_values;

  Var top() const { return final_states.back().y; }
};

/// Folds the encoder over the inputs from zero states. Dropout (when active)
/// applies to each step's input and to the inputs of upper layers, never to
/// recurrent paths. Throws std::invalid_argument on an empty sequence.
SequenceRun run_sequence(Graph& g, RecurrentEncoder& encoder, std::span<const Var> inputs,
                         const Dropout& dropout = {});

}  // namespace occamnet
