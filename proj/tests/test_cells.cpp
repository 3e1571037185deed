#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "occamnet/cells.hpp"
#include "occamnet/grad_suites.hpp"

using namespace occamnet;

namespace {

using Vec = std::vector<double>;

double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vec matvec(const Tensor& w, const Vec& x) {
  Vec out(w.rows(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r)
    for (std::size_t c = 0; c < w.cols(); ++c) out[r] += w(r, c) * x[c];
  return out;
}

double dotv(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct RefState {
  Vec m, y;
};

// Straight transcription of the cell equations on plain arrays.
RefState ref_lstm(const LstmParams& p, const Vec& x, const RefState& prev) {
  const std::size_t h = p.hidden_size;
  auto pre = [&](const Parameter& w, const Parameter& r, const Parameter& b) {
    Vec a = matvec(w.value, x), c = matvec(r.value, prev.y);
    for (std::size_t k = 0; k < h; ++k) a[k] += c[k] + b.value[k];
    return a;
  };
  const Vec az = pre(p.w_z, p.r_z, p.b_z), ai = pre(p.w_i, p.r_i, p.b_i), af = pre(p.w_f, p.r_f, p.b_f),
            ao = pre(p.w_o, p.r_o, p.b_o);
  RefState s{Vec(h), Vec(h)};
  for (std::size_t k = 0; k < h; ++k) {
    s.m[k] = sigm(ai[k]) * std::tanh(az[k]) + sigm(af[k]) * prev.m[k];
    s.y[k] = sigm(ao[k]) * std::tanh(s.m[k]);
  }
  return s;
}

double ref_gate(const GateParams& g, const Vec& x, const Vec& h) {
  double pre = dotv(g.p.value.values(), x) + dotv(g.q.value.values(), h) + g.b.value[0];
  if (g.kind == GateKind::kQuad) pre += dotv(h, matvec(g.w_quad.value, x));
  return sigm(pre);
}

Vec random_vec(std::size_t n, RngStream& rng) {
  Vec v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

void randomize_biases(RecurrentEncoder& enc, RngStream& rng) {
  ParameterRefs refs;
  enc.collect(refs);
  for (Parameter* p : refs)
    if (p->value.cols() == 1 && p->value.rows() > 1)
      for (double& v : p->value.values()) v = rng.uniform(-0.5, 0.5);
}

Vec to_vec(const Graph& g, Var v) {
  auto s = g.value(v).values();
  return {s.begin(), s.end()};
}

}  // namespace

TEST(Init, UniformByFanIn) {
  RngStream rng(1);
  const Tensor t = uniform_init(40, 25, rng);
  double lo = 1, hi = -1;
  for (double v : t.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_GE(lo, -0.2);
  EXPECT_LE(hi, 0.2);
  EXPECT_LT(lo, -0.15);  // the range is actually used
  EXPECT_GT(hi, 0.15);
}

TEST(Init, LstmBiasesAndNames) {
  RngStream rng(2);
  LstmParams p = LstmParams::create("enc", 3, 4, rng);
  EXPECT_EQ(p.w_z.name, "enc.W_z");
  EXPECT_EQ(p.r_o.value.shape(), (Shape{4, 4}));
  EXPECT_EQ(p.w_i.value.shape(), (Shape{4, 3}));
  for (double v : p.b_f.value.values()) EXPECT_EQ(v, 1.0);
  for (double v : p.b_z.value.values()) EXPECT_EQ(v, 0.0);
  ParameterRefs refs;
  p.collect(refs);
  EXPECT_EQ(refs.size(), 12u);
  EXPECT_THROW(LstmParams::create("x", 0, 4, rng), std::invalid_argument);
}

TEST(Init, GateParameterShapes) {
  RngStream rng(3);
  GateParams lin = GateParams::create("g", GateKind::kLinear, 5, 4, rng);
  GateParams quad = GateParams::create("g", GateKind::kQuad, 5, 4, rng);
  ParameterRefs a, b;
  lin.collect(a);
  quad.collect(b);
  EXPECT_EQ(a.size(), 3u);
  EXPECT_EQ(b.size(), 4u);
  EXPECT_EQ(quad.w_quad.value.shape(), (Shape{4, 5}));
  EXPECT_EQ(lin.b.value[0], 0.0);
  for (double v : lin.p.value.values()) EXPECT_LE(std::fabs(v), 1.0 / std::sqrt(5.0));
  for (double v : lin.q.value.values()) EXPECT_LE(std::fabs(v), 1.0 / std::sqrt(4.0));
}

TEST(GateKinds, ParseAndName) {
  EXPECT_EQ(parse_gate_kind("quad"), GateKind::kQuad);
  EXPECT_STREQ(gate_kind_name(GateKind::kLinear), "linear");
  EXPECT_THROW(parse_gate_kind("cubic"), std::invalid_argument);
}

TEST(LstmStep, MatchesReferenceOverASequence) {
  RngStream rng(4);
  LstmParams p = LstmParams::create("l", 3, 5, rng);
  for (double& v : p.b_i.value.values()) v = rng.uniform(-1, 1);
  Graph g;
  LstmState s = zero_state(g, 5);
  RefState r{Vec(5, 0.0), Vec(5, 0.0)};
  for (int t = 0; t < 6; ++t) {
    const Vec x = random_vec(3, rng);
    s = lstm_step(g, p, g.constant(x, {3, 1}), s).state;
    r = ref_lstm(p, x, r);
    const Vec m = to_vec(g, s.m), y = to_vec(g, s.y);
    for (std::size_t k = 0; k < 5; ++k) {
      EXPECT_NEAR(m[k], r.m[k], 1e-14);
      EXPECT_NEAR(y[k], r.y[k], 1e-14);
    }
  }
}

TEST(LstmStep, ShapeChecks) {
  RngStream rng(5);
  LstmParams p = LstmParams::create("l", 3, 5, rng);
  Graph g;
  EXPECT_THROW(lstm_step(g, p, g.zeros({4, 1}), zero_state(g, 5)), ShapeError);
  EXPECT_THROW(lstm_step(g, p, g.zeros({3, 1}), zero_state(g, 4)), ShapeError);
}

class GatedStepTest : public ::testing::TestWithParam<GateKind> {};

TEST_P(GatedStepTest, MatchesReference) {
  RngStream rng(6);
  LstmParams p = LstmParams::create("l", 3, 4, rng);
  GateParams gate = GateParams::create("g", GetParam(), 3, 4, rng);
  gate.b.value[0] = 0.3;
  Graph g;
  LstmState s = zero_state(g, 4);
  RefState r{Vec(4, 0.0), Vec(4, 0.0)};
  for (int t = 0; t < 5; ++t) {
    const Vec x = random_vec(3, rng);
    const StepOutput out = gated_lstm_step(g, p, gate, g.constant(x, {3, 1}), s);
    const double gv = ref_gate(gate, x, r.y);
    EXPECT_NEAR(g.scalar(*out.gate), gv, 1e-15);
    Vec xg = x;
    for (double& v : xg) v *= gv;
    r = ref_lstm(p, xg, r);
    s = out.state;
    const Vec y = to_vec(g, s.y);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(y[k], r.y[k], 1e-14);
  }
}

TEST_P(GatedStepTest, GateLiesInUnitInterval) {
  RngStream rng(7);
  LstmParams p = LstmParams::create("l", 2, 3, rng);
  GateParams gate = GateParams::create("g", GetParam(), 2, 3, rng);
  Graph g;
  LstmState s = zero_state(g, 3);
  for (int t = 0; t < 50; ++t) {
    const StepOutput out = gated_lstm_step(g, p, gate, g.constant(random_vec(2, rng), {2, 1}), s);
    const double v = g.scalar(*out.gate);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
    s = out.state;
  }
}

INSTANTIATE_TEST_SUITE_P(BothGates, GatedStepTest, ::testing::Values(GateKind::kLinear, GateKind::kQuad),
                         [](const auto& info) { return std::string(gate_kind_name(info.param)); });

TEST(StackedStep, GateConditionsOnTopLayer) {
  RngStream rng(8);
  RecurrentEncoder enc = RecurrentEncoder::gated("s", 3, 4, 3, GateKind::kQuad, rng);
  randomize_biases(enc, rng);
  Graph g;
  std::vector<LstmState> states;
  std::vector<RefState> refs;
  for (int l = 0; l < 3; ++l) {
    states.push_back(zero_state(g, 4));
    refs.push_back({Vec(4, 0.0), Vec(4, 0.0)});
  }
  for (int t = 0; t < 4; ++t) {
    const Vec x = random_vec(3, rng);
    const StackedStep step = stacked_gated_step(g, enc.layers, *enc.gate, g.constant(x, {3, 1}), states);
    const double gv = ref_gate(*enc.gate, x, refs.back().y);
    EXPECT_NEAR(g.scalar(step.gate), gv, 1e-15);
    Vec in = x;
    for (double& v : in) v *= gv;
    for (std::size_t l = 0; l < 3; ++l) {
      refs[l] = ref_lstm(enc.layers[l], in, refs[l]);
      in = refs[l].y;
    }
    states = step.states;
    const Vec top = to_vec(g, states.back().y);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(top[k], refs.back().y[k], 1e-14);
  }
}

TEST(StackedStep, RejectsMismatchedStates) {
  RngStream rng(9);
  RecurrentEncoder enc = RecurrentEncoder::gated("s", 3, 4, 2, GateKind::kLinear, rng);
  Graph g;
  std::vector<LstmState> one{zero_state(g, 4)};
  EXPECT_THROW(stacked_gated_step(g, enc.layers, *enc.gate, g.zeros({3, 1}), one), ShapeError);
}

TEST(Reduction, LargePositiveGateBiasRecoversVanillaLstm) {
  RngStream rng(10);
  for (GateKind kind : {GateKind::kLinear, GateKind::kQuad}) {
    RngStream init(11);
    RecurrentEncoder gated = RecurrentEncoder::gated("e", 3, 4, 1, kind, init);
    RecurrentEncoder plain;
    plain.layers = gated.layers;
    gated.gate->b.value[0] = 40.0;
    for (int seq = 0; seq < 100; ++seq) {
      const std::size_t len = 1 + static_cast<std::size_t>(rng.below(8));
      Graph g;
      std::vector<Var> xs;
      for (std::size_t t = 0; t < len; ++t) xs.push_back(g.constant(random_vec(3, rng), {3, 1}));
      const Vec a = to_vec(g, run_sequence(g, gated, xs).top());
      const Vec b = to_vec(g, run_sequence(g, plain, xs).top());
      for (std::size_t k = 0; k < 4; ++k) ASSERT_NEAR(a[k], b[k], 1e-9);
    }
  }
}

TEST(Reduction, LargeNegativeGateBiasIgnoresInputs) {
  RngStream rng(12);
  RngStream init(13);
  RecurrentEncoder enc = RecurrentEncoder::gated("e", 3, 4, 1, GateKind::kQuad, init);
  enc.gate->b.value[0] = -40.0;
  for (int seq = 0; seq < 100; ++seq) {
    const std::size_t len = 1 + static_cast<std::size_t>(rng.below(8));
    Graph g;
    std::vector<Var> xs, ys;
    for (std::size_t t = 0; t < len; ++t) {
      xs.push_back(g.constant(random_vec(3, rng), {3, 1}));
      ys.push_back(g.constant(random_vec(3, rng), {3, 1}));
    }
    const Vec a = to_vec(g, run_sequence(g, enc, xs).top());
    const Vec b = to_vec(g, run_sequence(g, enc, ys).top());
    for (std::size_t k = 0; k < 4; ++k) ASSERT_NEAR(a[k], b[k], 1e-9);
  }
}

TEST(RunSequence, GateBookkeeping) {
  RngStream rng(14);
  RecurrentEncoder gated = RecurrentEncoder::gated("e", 2, 3, 2, GateKind::kLinear, rng);
  RecurrentEncoder plain = RecurrentEncoder::lstm("p", 2, 3, 2, rng);
  Graph g;
  std::vector<Var> xs;
  for (int t = 0; t < 7; ++t) xs.push_back(g.constant(random_vec(2, rng), {2, 1}));
  const SequenceRun a = run_sequence(g, gated, xs);
  EXPECT_EQ(a.gates.size(), 7u);
  EXPECT_EQ(a.gate_values.size(), 7u);
  EXPECT_EQ(a.final_states.size(), 2u);
  for (std::size_t t = 0; t < 7; ++t) EXPECT_EQ(a.gate_values[t], g.scalar(a.gates[t]));
  const SequenceRun b = run_sequence(g, plain, xs);
  EXPECT_TRUE(b.gates.empty());
  EXPECT_THROW(run_sequence(g, plain, std::span<const Var>{}), std::invalid_argument);
}

TEST(RunSequence, InactiveDropoutIsIdentity) {
  RngStream rng(15);
  RecurrentEncoder enc = RecurrentEncoder::gated("e", 2, 3, 2, GateKind::kQuad, rng);
  RngStream drop(16);
  Graph g;
  std::vector<Var> xs;
  for (int t = 0; t < 4; ++t) xs.push_back(g.constant(random_vec(2, rng), {2, 1}));
  const Vec a = to_vec(g, run_sequence(g, enc, xs).top());
  const Vec b = to_vec(g, run_sequence(g, enc, xs, {0.0, &drop}).top());
  const Vec c = to_vec(g, run_sequence(g, enc, xs, {0.5, nullptr}).top());
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  const Vec d = to_vec(g, run_sequence(g, enc, xs, {0.5, &drop}).top());
  EXPECT_NE(a, d);
}

TEST(RunSequence, GradientsReachEveryParameter) {
  RngStream rng(17);
  RecurrentEncoder enc = RecurrentEncoder::gated("e", 2, 3, 3, GateKind::kQuad, rng);
  ParameterRefs refs;
  enc.collect(refs);
  Graph g;
  std::vector<Var> xs;
  for (int t = 0; t < 3; ++t) xs.push_back(g.constant(random_vec(2, rng), {2, 1}));
  const SequenceRun run = run_sequence(g, enc, xs);
  g.backward(g.sum(run.top()));
  for (Parameter* p : refs) {
    double norm = 0.0;
    for (double v : p->grad.values()) norm += v * v;
    EXPECT_GT(norm, 0.0) << p->name;
  }
}

TEST(GradCheckSuites, CellsPass) {
  for (const char* model : {"lstm", "gated-lstm", "stacked"}) {
    for (GateKind kind : {GateKind::kLinear, GateKind::kQuad}) {
      GradSuiteOptions o;
      o.gate = kind;
      for (const auto& r : grad_suite(model, o)) EXPECT_TRUE(r.report.passed()) << r.name << ": " << r.report.summary();
    }
  }
}
