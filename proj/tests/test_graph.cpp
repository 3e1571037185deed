#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "occamnet/grad_check.hpp"
#include "occamnet/grad_suites.hpp"
#include "occamnet/graph.hpp"
#include "occamnet/rng.hpp"

using namespace occamnet;

namespace {

std::vector<double> as_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

double sigmoid_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> values(const Graph& g, Var v) {
  auto s = g.value(v).values();
  return {s.begin(), s.end()};
}

}  // namespace

TEST(GraphForward, Matmul) {
  Graph g;
  const Var a = g.constant(Tensor::matrix({{1, 2}, {3, 4}, {5, 6}}));
  const Var b = g.constant(Tensor::matrix({{1, 0, 2}, {-1, 3, 1}}));
  const Var c = g.matmul(a, b);
  EXPECT_EQ(g.shape(c), (Shape{3, 3}));
  EXPECT_EQ(values(g, c), (std::vector<double>{-1, 6, 4, -1, 12, 10, -1, 18, 16}));
}

TEST(GraphForward, ElementwiseOps) {
  Graph g;
  const Var a = g.constant(Tensor::column({0.5, -1.0, 2.0}));
  const Var b = g.constant(Tensor::column({2.0, 3.0, -0.5}));
  EXPECT_EQ(values(g, g.add(a, b)), (std::vector<double>{2.5, 2.0, 1.5}));
  EXPECT_EQ(values(g, g.hadamard(a, b)), (std::vector<double>{1.0, -3.0, -1.0}));
  EXPECT_EQ(values(g, g.scale(a, 2.0)), (std::vector<double>{1.0, -2.0, 4.0}));
  EXPECT_EQ(values(g, g.one_minus(a)), (std::vector<double>{0.5, 2.0, -1.0}));
  EXPECT_EQ(values(g, g.sub(a, b)), (std::vector<double>{-1.5, -4.0, 2.5}));
  EXPECT_EQ(values(g, g.clamp(a, 0.0, 1.0)), (std::vector<double>{0.5, 0.0, 1.0}));
  const Var s = g.constant(Tensor::matrix({{-2.0}}));
  EXPECT_EQ(values(g, g.scale_by(a, s)), (std::vector<double>{-1.0, 2.0, -4.0}));
  EXPECT_DOUBLE_EQ(g.scalar(g.sum(a)), 1.5);
  EXPECT_DOUBLE_EQ(g.scalar(g.dot(a, b)), -3.0);
}

TEST(GraphForward, Nonlinearities) {
  Graph g;
  const Var a = g.constant(Tensor::column({-3.0, 0.0, 0.7}));
  const auto sig = values(g, g.sigmoid(a));
  const auto th = values(g, g.tanh(a));
  const double xs[] = {-3.0, 0.0, 0.7};
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(sig[i], sigmoid_ref(xs[i]), 1e-15);
    EXPECT_NEAR(th[i], std::tanh(xs[i]), 1e-15);
  }
  const Var p = g.constant(Tensor::column({1.0, std::exp(1.0)}));
  const auto lg = values(g, g.log(p));
  EXPECT_DOUBLE_EQ(lg[0], 0.0);
  EXPECT_NEAR(lg[1], 1.0, 1e-15);
}

TEST(GraphForward, SigmoidIsStableAtExtremes) {
  Graph g;
  const auto v = values(g, g.sigmoid(g.constant(Tensor::column({-800.0, 800.0, -40.0, 40.0}))));
  EXPECT_EQ(v[0], 0.0);
  EXPECT_EQ(v[1], 1.0);
  EXPECT_NEAR(v[2], std::exp(-40.0), 1e-30);
  EXPECT_NEAR(v[3], 1.0, 1e-17);
  for (double x : v) EXPECT_TRUE(std::isfinite(x));
}

TEST(GraphForward, ConcatRows) {
  Graph g;
  const Var parts[] = {g.constant(Tensor::column({1, 2})), g.constant(Tensor::column({3}))};
  const Var c = g.concat_rows(parts);
  EXPECT_EQ(g.shape(c), (Shape{3, 1}));
  EXPECT_EQ(values(g, c), (std::vector<double>{1, 2, 3}));
}

TEST(GraphForward, NegLogSoftmaxMatchesDirectFormula) {
  Graph g;
  const std::vector<double> s{1.0, -2.0, 0.5, 3.0};
  double z = 0.0;
  for (double x : s) z += std::exp(x);
  const Var v = g.neg_log_softmax(g.constant(s, {4, 1}), 2);
  EXPECT_NEAR(g.scalar(v), -(0.5 - std::log(z)), 1e-14);
  // Huge scores stay finite.
  const Var big = g.neg_log_softmax(g.constant(Tensor::column({1000.0, 0.0})), 1);
  EXPECT_NEAR(g.scalar(big), 1000.0, 1e-9);
}

TEST(GraphForward, CosineAndHinge) {
  Graph g;
  const Var a = g.constant(Tensor::column({1, 2, 2}));
  const Var b = g.constant(Tensor::column({2, 0, 1}));
  EXPECT_NEAR(g.scalar(g.cosine(a, b)), 4.0 / (3.0 * std::sqrt(5.0)), 1e-15);
  const Var s = g.constant(Tensor::column({0.2, 0.5, -1.0}));
  // max(1 - 0.2 + 0.5, 0) + max(1 - 0.2 - 1.0, 0)
  EXPECT_NEAR(g.scalar(g.margin_hinge(s, 0, 1.0)), 1.3, 1e-15);
}

TEST(GraphErrors, ShapeMismatchesThrow) {
  Graph g;
  const Var a = g.constant(Tensor(2, 3));
  const Var b = g.constant(Tensor(2, 1));
  EXPECT_THROW(g.matmul(a, g.constant(Tensor(2, 2))), ShapeError);
  EXPECT_THROW(g.add(a, b), ShapeError);
  EXPECT_THROW(g.hadamard(a, b), ShapeError);
  EXPECT_THROW(g.dot(a, b), ShapeError);
  EXPECT_THROW(g.scale_by(b, b), ShapeError);
  EXPECT_THROW(g.neg_log_softmax(b, 2), std::out_of_range);
}

TEST(GraphErrors, DomainErrors) {
  Graph g;
  EXPECT_THROW(g.log(g.constant(Tensor::column({1.0, 0.0}))), DomainError);
  EXPECT_THROW(g.log(g.constant(Tensor::column({-1.0}))), DomainError);
  EXPECT_THROW(g.cosine(g.constant(Tensor::column({0.0, 0.0})), g.constant(Tensor::column({1.0, 0.0}))),
               DomainError);
}

TEST(GraphBackward, RootMustBeScalar) {
  Graph g;
  EXPECT_THROW(g.backward(g.constant(Tensor(2, 1))), ShapeError);
}

TEST(GraphBackward, SecondBackwardThrows) {
  Parameter p("p", Tensor::column({1.0, 2.0}));
  Graph g;
  const Var loss = g.sum(g.param(p));
  g.backward(loss);
  EXPECT_THROW(g.backward(loss), std::logic_error);
  g.clear();
  const Var again = g.sum(g.param(p));
  EXPECT_NO_THROW(g.backward(again));
  EXPECT_EQ(p.grad[0], 2.0);  // accumulated across the two graphs
}

TEST(GraphBackward, RequiresGradPropagates) {
  Parameter p("p", Tensor::column({1.0}));
  Graph g;
  const Var c = g.constant(Tensor::column({2.0}));
  const Var x = g.param(p);
  EXPECT_FALSE(g.requires_grad(c));
  EXPECT_TRUE(g.requires_grad(x));
  EXPECT_FALSE(g.requires_grad(g.tanh(c)));
  EXPECT_TRUE(g.requires_grad(g.hadamard(c, x)));
  EXPECT_EQ(g.gradient(c).size(), 0u);
}

TEST(GraphBackward, HandGradients) {
  // L = sum(W x) with W [2x2] parameter, x constant: dL/dW[i][j] = x[j].
  Parameter w("W", Tensor::matrix({{1, 2}, {3, 4}}));
  Graph g;
  const Var x = g.constant(Tensor::column({5, -7}));
  g.backward(g.sum(g.matmul(g.param(w), x)));
  EXPECT_EQ(w.grad, Tensor::matrix({{5, -7}, {5, -7}}));

  // L = sigmoid(a) for scalar a: dL/da = s(1 - s).
  Parameter a("a", Tensor::matrix({{0.3}}));
  Graph g2;
  g2.backward(g2.sigmoid(g2.param(a)));
  const double s = sigmoid_ref(0.3);
  EXPECT_NEAR(a.grad[0], s * (1 - s), 1e-15);
}

TEST(GraphBackward, RowLookupGradientHitsOnlyThatRow) {
  Parameter table("E", Tensor::matrix({{1, 2}, {3, 4}, {5, 6}}));
  Graph g;
  const Var r = g.row(table, 1);
  EXPECT_EQ(values(g, r), (std::vector<double>{3, 4}));
  g.backward(g.dot(r, g.constant(Tensor::column({10, 20}))));
  EXPECT_EQ(as_vec(table.grad.values()), (std::vector<double>{0, 0, 10, 20, 0, 0}));
  EXPECT_THROW(g.row(table, 3), std::out_of_range);
}

TEST(GraphBackward, ClampPassesGradientOnlyInside) {
  Parameter p("p", Tensor::column({-0.5, 0.5, 1.5}));
  Graph g;
  g.backward(g.sum(g.clamp(g.param(p), 0.0, 1.0)));
  EXPECT_EQ(as_vec(p.grad.values()), (std::vector<double>{0, 1, 0}));
}

TEST(GraphBackward, SharedSubexpressionAccumulates) {
  Parameter p("p", Tensor::matrix({{3.0}}));
  Graph g;
  const Var x = g.param(p);
  g.backward(g.hadamard(x, x));  // d(x^2)/dx = 2x
  EXPECT_DOUBLE_EQ(p.grad[0], 6.0);
}

TEST(GraphBackward, ClearReusesCapacity) {
  Parameter p("p", Tensor(50, 50, 0.01));
  Graph g;
  for (int i = 0; i < 3; ++i) {
    g.clear();
    g.backward(g.sum(g.tanh(g.matmul(g.param(p), g.param(p)))));
  }
  EXPECT_TRUE(p.grad.all_finite());
}

TEST(GradCheck, RejectsNonPositiveStep) {
  Parameter p("p", Tensor::column({1.0}));
  auto build = [&](Graph& g) { return g.sum(g.param(p)); };
  EXPECT_THROW(grad_check(build, {&p}, 0.0), std::invalid_argument);
  EXPECT_THROW(grad_check(build, {&p}, -1e-5), std::invalid_argument);
}

TEST(GradCheck, DetectsAWrongGradient) {
  // Reading the value into a constant severs the path: analytic gradient 0,
  // numeric gradient cos(x).
  Parameter p("p", Tensor::column({0.4, -0.2}));
  auto build = [&](Graph& g) {
    std::vector<double> v;
    for (std::size_t i = 0; i < p.value.size(); ++i) v.push_back(std::sin(p.value[i]));
    return g.sum(g.add(g.constant(v, p.value.shape()), g.scale(g.param(p), 0.0)));
  };
  const GradCheckReport r = grad_check(build, {&p});
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.failures.size(), 2u);
  EXPECT_EQ(r.entries_checked, 2u);
  EXPECT_EQ(r.failures[0].parameter, "p");
  EXPECT_NEAR(r.failures[0].numeric, std::cos(0.4), 1e-8);
}

TEST(GradCheck, LeavesGradientsZeroed) {
  Parameter p("p", Tensor::column({0.4, -0.2}));
  auto build = [&](Graph& g) { return g.dot(g.param(p), g.param(p)); };
  const GradCheckReport r = grad_check(build, {&p});
  EXPECT_TRUE(r.passed()) << r.summary();
  EXPECT_EQ(as_vec(p.grad.values()), (std::vector<double>{0, 0}));
  EXPECT_EQ(as_vec(p.value.values()), (std::vector<double>{0.4, -0.2}));
}

TEST(GradCheck, EveryPrimitivePasses) {
  for (const auto& r : grad_suite("primitives", {})) EXPECT_TRUE(r.report.passed()) << r.name << ": " << r.report.summary();
}

TEST(GradCheck, UnknownSuiteThrows) { EXPECT_THROW(grad_suite("gru", {}), std::invalid_argument); }
