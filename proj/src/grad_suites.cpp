#include "occamnet/grad_suites.hpp"

#include <memory>
#include <stdexcept>

#include "occamnet/hierarchical.hpp"
#include "occamnet/objectives.hpp"

namespace occamnet {

namespace {

Tensor random_tensor(std::size_t rows, std::size_t cols, RngStream& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// Contracts a node with a fixed random weight so every entry matters.
Var readout(Graph& g, Var v, const Tensor& weights) { return g.sum(g.hadamard(v, g.constant(weights))); }

struct PrimitiveCase {
  std::string name;
  std::vector<std::unique_ptr<Parameter>> params;
  std::function<Var(Graph&, std::vector<Var>&)> expr;
};

std::vector<NamedReport> primitive_suite(const GradSuiteOptions& o) {
  RngStream rng(o.seed);
  const std::size_t n = o.hidden;
  auto make = [&](const std::string& name, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
    return std::make_unique<Parameter>(Parameter{name, random_tensor(r, c, rng, lo, hi)});
  };
  const Tensor w_col = random_tensor(n, 1, rng);
  const Tensor w_mat = random_tensor(n, o.input, rng);
  const Tensor w_concat = random_tensor(n + 2, 1, rng);

  std::vector<PrimitiveCase> cases;
  auto add_case = [&](std::string name, std::vector<std::unique_ptr<Parameter>> ps,
                      std::function<Var(Graph&, std::vector<Var>&)> expr) {
    cases.push_back({std::move(name), std::move(ps), std::move(expr)});
  };
  auto list = [](auto... ps) {
    std::vector<std::unique_ptr<Parameter>> v;
    (v.push_back(std::move(ps)), ...);
    return v;
  };

  add_case("matmul", list(make("A", n, o.input), make("B", o.input, o.input)),
           [&](Graph& g, std::vector<Var>& v) { return readout(g, g.matmul(v[0], v[1]), w_mat); });
  add_case("add", list(make("a", n, 1), make("b", n, 1)),
           [&](Graph& g, std::vector<Var>& v) { return readout(g, g.add(v[0], v[1]), w_col); });
  add_case("hadamard", list(make("a", n, 1), make("b", n, 1)),
           [&](Graph& g, std::vector<Var>& v) { return readout(g, g.hadamard(v[0], v[1]), w_col); });
  add_case("scale", list(make("a", n, 1)),
           [&](Graph& g, std::vector<Var>& v) { return readout(g, g.scale(v[0], -1.7), w_col); });
  add_case("scale_by", list(make("a", n, 1), make("s", 1, 1)),
           [&](Graph& g, std::vector<Var>& v) { return readout(g, g.scale_by(v[0], v[1]), w_col); });
  add_case("sigmoid", list(make("a", n, 1, -3.0, 3.0)),
           [&](Graph& g, std::vector<Var>& v) { return readout(g, g.sigmoid(v[0]), w_col); });
  add_case("tanh", list(make("a", n, 1, -2.0, 2.0)),
           [&](Graph& g, std::vector<Var>& v) { return readout(g, g.tanh(v[0]), w_col); });
  add_case("log", list(make("a", n, 1, 0.5, 2.0)),
           [&](Graph& g, std::vector<Var>& v) { return readout(g, g.log(v[0]), w_col); });
  add_case("one_minus", list(make("a", n, 1)),
           [&](Graph& g, std::vector<Var>& v) { return readout(g, g.one_minus(v[0]), w_col); });
  add_case("clamp", list(make("a", n, 1, 0.1, 0.9)),
           [&](Graph& g, std::vector<Var>& v) { return readout(g, g.clamp(v[0], 0.0, 1.0), w_col); });
  add_case("sum", list(make("a", n, o.input)), [&](Graph& g, std::vector<Var>& v) {
    return g.scale(g.sum(v[0]), 0.3);
  });
  add_case("dot", list(make("a", n, 1), make("b", n, 1)),
           [&](Graph& g, std::vector<Var>& v) { return g.dot(v[0], v[1]); });
  add_case("concat_rows", list(make("a", 2, 1), make("b", n, 1)),
           [&](Graph& g, std::vector<Var>& v) { return readout(g, g.concat_rows(v), w_concat); });
  add_case("neg_log_softmax", list(make("s", n, 1, -2.0, 2.0)),
           [&](Graph& g, std::vector<Var>& v) { return g.neg_log_softmax(v[0], 1); });
  add_case("cosine", list(make("a", n, 1), make("b", n, 1)),
           [&](Graph& g, std::vector<Var>& v) { return g.cosine(v[0], v[1]); });
  add_case("margin_hinge", list(make("s", n, 1, -0.3, 0.3)),
           [&](Graph& g, std::vector<Var>& v) { return g.margin_hinge(v[0], 0, 1.0); });

  std::vector<NamedReport> out;
  for (auto& c : cases) {
    ParameterRefs refs;
    for (auto& p : c.params) refs.push_back(p.get());
    auto build = [&](Graph& g) {
      std::vector<Var> vars;
      for (auto* p : refs) vars.push_back(g.param(*p));
      return c.expr(g, vars);
    };
    out.push_back({"primitive " + c.name, grad_check(build, refs, o.step, o.tolerance)});
  }
  return out;
}

std::vector<Tensor> random_inputs(std::size_t steps, std::size_t size, RngStream& rng) {
  std::vector<Tensor> xs;
  for (std::size_t t = 0; t < steps; ++t) xs.push_back(random_tensor(size, 1, rng));
  return xs;
}

std::vector<NamedReport> cell_suite(const std::string& model, const GradSuiteOptions& o) {
  RngStream rng(o.seed);
  const std::size_t depth = model == "stacked" ? o.layers : 1;
  RecurrentEncoder enc = model == "lstm" ? RecurrentEncoder::lstm("lstm", o.input, o.hidden, depth, rng)
                                         : RecurrentEncoder::gated(model, o.input, o.hidden, depth, o.gate, rng);
  // Nonzero biases exercise every path.
  ParameterRefs refs;
  enc.collect(refs);
  for (Parameter* p : refs)
    if (p->value.cols() == 1) p->value = random_tensor(p->value.rows(), 1, rng, -0.5, 0.5);
  const auto xs = random_inputs(o.steps, o.input, rng);
  const Tensor w = random_tensor(o.hidden, 1, rng);
  auto build = [&](Graph& g) {
    std::vector<Var> inputs;
    for (const auto& x : xs) inputs.push_back(g.constant(x));
    const SequenceRun run = run_sequence(g, enc, inputs, {});
    Var loss = readout(g, run.top(), w);
    loss = g.add(loss, readout(g, run.final_states.back().m, w));
    if (!run.gates.empty()) loss = g.add(loss, sparsity_penalty(g, run.gates, 0.3));
    return loss;
  };
  std::string name = model;
  if (model != "lstm") name += std::string(" (") + gate_kind_name(o.gate) + " gate)";
  if (model == "stacked") name += ", " + std::to_string(depth) + " layers";
  return {{name, grad_check(build, refs, o.step, o.tolerance)}};
}

std::vector<NamedReport> hg_suite(const GradSuiteOptions& o) {
  RngStream rng(o.seed);
  HgLstmConfig cfg;
  cfg.vocab_size = 9;
  cfg.embed_dim = o.input;
  cfg.fact_hidden = o.hidden;
  cfg.hl_hidden = o.hidden;
  cfg.hl_layers = o.layers;
  cfg.decoder_hidden = o.hidden;
  cfg.gate = o.gate;
  HgLstmParams params = HgLstmParams::create(cfg, rng);
  const ParameterRefs refs = params.parameters();
  for (Parameter* p : refs)
    if (p->value.cols() == 1) p->value = random_tensor(p->value.rows(), 1, rng, -0.5, 0.5);

  Story story;
  story.facts = {{3, 4, 5}, {6, 4, 7}};
  story.question = {8, 6};
  story.answer = {7};
  story.supporting = {1};
  BabiLossConfig loss_cfg;
  loss_cfg.lambda_fact = 0.7;
  loss_cfg.lambda_word = 0.2;
  auto build = [&](Graph& g) {
    const StoryEncoding enc = encode_story(g, params, story);
    const auto scores = decode_teacher_forced(g, params.decoder, params.embeddings, enc.hl_final, story.answer);
    TokenIds target = story.answer;
    target.push_back(Vocabulary::kEos);
    BabiLossParts parts;
    parts.prediction = margin_prediction_loss(g, scores, target, loss_cfg.margin);
    parts.fact = fact_selection_loss(g, enc.fact_gates, story.supporting, loss_cfg.mu_unsupporting);
    parts.word = word_sparsity_loss(g, enc.word_gates);
    return combined_babi_loss(g, parts, loss_cfg);
  };
  return {{"hg-lstm combined loss, 2-fact story", grad_check(build, refs, o.step, o.tolerance)}};
}

}  // namespace

const std::vector<std::string>& grad_suite_models() {
  static const std::vector<std::string> models{"primitives", "lstm", "gated-lstm", "stacked", "hg-lstm"};
  return models;
}

std::vector<NamedReport> grad_suite(const std::string& model, const GradSuiteOptions& options) {
  if (options.input < 1 || options.hidden < 2 || options.layers < 1 || options.steps < 1) {
    throw std::invalid_argument("grad-check: need input >= 1, hidden >= 2, layers >= 1, steps >= 1");
  }
  if (model == "primitives") return primitive_suite(options);
  if (model == "lstm" || model == "gated-lstm" || model == "stacked") return cell_suite(model, options);
  if (model == "hg-lstm") return hg_suite(options);
  throw std::invalid_argument("unknown grad-check model '" + model +
                              "' (expected primitives|lstm|gated-lstm|stacked|hg-lstm)");
}

}  // namespace occamnet
