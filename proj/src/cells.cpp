#include "occamnet/cells.hpp"

#include <cmath>
#include <stdexcept>

namespace occamnet {

const char* gate_kind_name(GateKind kind) { return kind == GateKind::kLinear ? "linear" : "quad"; }

GateKind parse_gate_kind(const std::string& text) {
  if (text == "linear") return GateKind::kLinear;
  if (text == "quad") return GateKind::kQuad;
  throw std::invalid_argument("unknown gate kind '" + text + "' (expected linear|quad)");
}

Tensor uniform_init(std::size_t rows, std::size_t cols, RngStream& rng) {
  Tensor t(rows, cols);
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
  return t;
}

LstmParams LstmParams::create(const std::string& prefix, std::size_t input, std::size_t hidden, RngStream& rng) {
  if (input == 0 || hidden == 0) throw std::invalid_argument("LstmParams: sizes must be positive");
  LstmParams p;
  p.input_size = input;
  p.hidden_size = hidden;
  p.w_z = {prefix + ".W_z", uniform_init(hidden, input, rng)};
  p.w_i = {prefix + ".W_i", uniform_init(hidden, input, rng)};
  p.w_f = {prefix + ".W_f", uniform_init(hidden, input, rng)};
  p.w_o = {prefix + ".W_o", uniform_init(hidden, input, rng)};
  p.r_z = {prefix + ".R_z", uniform_init(hidden, hidden, rng)};
  p.r_i = {prefix + ".R_i", uniform_init(hidden, hidden, rng)};
  p.r_f = {prefix + ".R_f", uniform_init(hidden, hidden, rng)};
  p.r_o = {prefix + ".R_o", uniform_init(hidden, hidden, rng)};
  p.b_z = {prefix + ".b_z", Tensor(hidden, 1)};
  p.b_i = {prefix + ".b_i", Tensor(hidden, 1)};
  p.b_f = {prefix + ".b_f", Tensor(hidden, 1, 1.0)};
  p.b_o = {prefix + ".b_o", Tensor(hidden, 1)};
  return p;
}

void LstmParams::collect(ParameterRefs& out) {
  for (Parameter* p : {&w_z, &w_i, &w_f, &w_o, &r_z, &r_i, &r_f, &r_o, &b_z, &b_i, &b_f, &b_o}) out.push_back(p);
}

GateParams GateParams::create(const std::string& prefix, GateKind kind, std::size_t input, std::size_t cond,
                              RngStream& rng) {
  GateParams g;
  g.kind = kind;
  g.input_size = input;
  g.cond_size = cond;
  g.p = {prefix + ".p", uniform_init(input, 1, rng)};
  g.q = {prefix + ".q", uniform_init(cond, 1, rng)};
  // uniform_init uses cols as fan-in; rescale the vectors to their own width.
  for (double& v : g.p.value.values()) v /= std::sqrt(static_cast<double>(input));
  for (double& v : g.q.value.values()) v /= std::sqrt(static_cast<double>(cond));
  if (kind == GateKind::kQuad) g.w_quad = {prefix + ".W", uniform_init(cond, input, rng)};
  g.b = {prefix + ".b", Tensor(1, 1)};
  return g;
}

void GateParams::collect(ParameterRefs& out) {
  out.push_back(&p);
  out.push_back(&q);
  if (kind == GateKind::kQuad) out.push_back(&w_quad);
  out.push_back(&b);
}

LstmState zero_state(Graph& g, std::size_t hidden) {
  const Var z = g.zeros({hidden, 1});
  return {z, z};
}

namespace {

void check_input(const LstmParams& params, Shape x, const char* what) {
  if (x != Shape{params.input_size, 1}) {
    throw ShapeError(std::string(what) + ": input " + x.str() + " but cell expects " +
                     Shape{params.input_size, 1}.str());
  }
}

void check_state(Graph& g, const LstmParams& params, const LstmState& s, const char* what) {
  const Shape want{params.hidden_size, 1};
  if (g.shape(s.m) != want || g.shape(s.y) != want) {
    throw ShapeError(std::string(what) + ": state " + g.shape(s.m).str() + "/" + g.shape(s.y).str() +
                     " but cell expects " + want.str());
  }
}

Var affine(Graph& g, Parameter& w, Var x, Parameter& r, Var y, Parameter& b) {
  return g.add(g.add(g.matmul(g.param(w), x), g.matmul(g.param(r), y)), g.param(b));
}

LstmState lstm_core(Graph& g, LstmParams& p, Var x, const LstmState& prev) {
  const Var z = g.tanh(affine(g, p.w_z, x, p.r_z, prev.y, p.b_z));
  const Var i = g.sigmoid(affine(g, p.w_i, x, p.r_i, prev.y, p.b_i));
  const Var f = g.sigmoid(affine(g, p.w_f, x, p.r_f, prev.y, p.b_f));
  const Var o = g.sigmoid(affine(g, p.w_o, x, p.r_o, prev.y, p.b_o));
  const Var m = g.add(g.hadamard(i, z), g.hadamard(f, prev.m));
  const Var y = g.hadamard(o, g.tanh(m));
  return {m, y};
}

}  // namespace

StepOutput lstm_step(Graph& g, LstmParams& params, Var x, const LstmState& prev) {
  check_input(params, g.shape(x), "lstm_step");
  check_state(g, params, prev, "lstm_step");
  return {lstm_core(g, params, x, prev), std::nullopt};
}

Var gate_activation(Graph& g, GateParams& gate, Var x, Var h) {
  if (g.shape(x) != Shape{gate.input_size, 1} || g.shape(h) != Shape{gate.cond_size, 1}) {
    throw ShapeError("gate_activation: got x " + g.shape(x).str() + ", h " + g.shape(h).str() + "; gate expects " +
                     Shape{gate.input_size, 1}.str() + ", " + Shape{gate.cond_size, 1}.str());
  }
  Var pre = g.add(g.dot(g.param(gate.p), x), g.dot(g.param(gate.q), h));
  if (gate.kind == GateKind::kQuad) pre = g.add(pre, g.dot(h, g.matmul(g.param(gate.w_quad), x)));
  return g.sigmoid(g.add(pre, g.param(gate.b)));
}

StepOutput gated_lstm_step(Graph& g, LstmParams& params, GateParams& gate, Var x, const LstmState& prev) {
  check_input(params, g.shape(x), "gated_lstm_step");
  check_state(g, params, prev, "gated_lstm_step");
  const Var occam = gate_activation(g, gate, x, prev.y);
  const Var gated = g.scale_by(x, occam);
  return {lstm_core(g, params, gated, prev), occam};
}

StackedStep stacked_gated_step(Graph& g, std::span<LstmParams> layers, GateParams& gate, Var x,
                               std::span<const LstmState> prev, const Dropout& between) {
  if (layers.empty()) throw std::invalid_argument("stacked_gated_step: empty layer list");
  if (prev.size() != layers.size()) {
    throw ShapeError("stacked_gated_step: " + std::to_string(prev.size()) + " states for " +
                     std::to_string(layers.size()) + " layers");
  }
  for (std::size_t l = 1; l < layers.size(); ++l) {
    if (layers[l].input_size != layers[l - 1].hidden_size) {
      throw ShapeError("stacked_gated_step: layer " + std::to_string(l) + " input width " +
                       std::to_string(layers[l].input_size) + " != hidden size " +
                       std::to_string(layers[l - 1].hidden_size) + " of the layer below");
    }
  }
  check_input(layers.front(), g.shape(x), "stacked_gated_step");
  for (std::size_t l = 0; l < layers.size(); ++l) check_state(g, layers[l], prev[l], "stacked_gated_step");

  StackedStep out;
  out.gate = gate_activation(g, gate, x, prev.back().y);
  Var input = g.scale_by(x, out.gate);
  out.states.reserve(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (l > 0) input = apply_dropout(g, input, between);
    out.states.push_back(lstm_core(g, layers[l], input, prev[l]));
    input = out.states.back().y;
  }
  return out;
}

RecurrentEncoder RecurrentEncoder::lstm(const std::string& prefix, std::size_t input, std::size_t hidden,
                                        std::size_t depth, RngStream& rng) {
  if (depth == 0) throw std::invalid_argument("RecurrentEncoder: depth must be positive");
  RecurrentEncoder enc;
  for (std::size_t l = 0; l < depth; ++l) {
    enc.layers.push_back(LstmParams::create(prefix + ".l" + std::to_string(l), l == 0 ? input : hidden, hidden, rng));
  }
  return enc;
}

RecurrentEncoder RecurrentEncoder::gated(const std::string& prefix, std::size_t input, std::size_t hidden,
                                         std::size_t depth, GateKind kind, RngStream& rng) {
  RecurrentEncoder enc = lstm(prefix, input, hidden, depth, rng);
  enc.gate = GateParams::create(prefix + ".gate", kind, input, hidden, rng);
  return enc;
}

void RecurrentEncoder::collect(ParameterRefs& out) {
  for (auto& layer : layers) layer.collect(out);
  if (gate) gate->collect(out);
}

SequenceRun run_sequence(Graph& g, RecurrentEncoder& encoder, std::span<const Var> inputs, const Dropout& dropout) {
  if (inputs.empty()) throw std::invalid_argument("run_sequence: empty input sequence");
  SequenceRun run;
  std::vector<LstmState> states;
  states.reserve(encoder.depth());
  for (const auto& layer : encoder.layers) states.push_back(zero_state(g, layer.hidden_size));

  for (Var raw : inputs) {
    const Var x = apply_dropout(g, raw, dropout);
    if (encoder.gate) {
      StackedStep step = stacked_gated_step(g, encoder.layers, *encoder.gate, x, states, dropout);
      states = std::move(step.states);
      run.gates.push_back(step.gate);
      run.gate_values.push_back(g.scalar(step.gate));
    } else {
      Var input = x;
      for (std::size_t l = 0; l < encoder.depth(); ++l) {
        if (l > 0) input = apply_dropout(g, input, dropout);
        states[l] = lstm_step(g, encoder.layers[l], input, states[l]).state;
        input = states[l].y;
      }
    }
  }
  run.final_states = std::move(states);
  return run;
}

}  // namespace occamnet
