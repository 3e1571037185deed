#pragma once

// Reverse-mode differentiation over a small, fixed set of dense primitives.
//
// A Graph records each primitive application as a node in creation order,
// which is a topological order. backward() walks the nodes once in reverse.
// Parameter leaves alias the Parameter's own value and gradient buffers, so
// gradients accumulate straight into Parameter::grad across graphs until the
// caller zeroes them. A graph is single-use: backward() may run once, then
// the graph must be cleared and rebuilt.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "occamnet/tensor.hpp"

namespace occamnet {

/// A trainable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string name_, Tensor value_)
      : name(std::move(name_)), value(std::move(value_)), grad(value.shape()) {}

  void zero_grad() { grad.fill(0.0); }
};

using ParameterRefs = std::vector<Parameter*>;

/// Handle to a node of one Graph. Only meaningful with the graph that made it.
class Var {
 public:
  Var() = default;
  std::uint32_t id() const { return id_; }
  bool valid() const { return id_ != kInvalid; }

 private:
  friend class Graph;
  explicit Var(std::uint32_t id) : id_(id) {}
  static constexpr std::uint32_t kInvalid = 0xffffffffu;
  std::uint32_t id_ = kInvalid;
};

/// Read-only window onto a node's value or gradient.
struct View {
  const double* data = nullptr;
  Shape shape;

  std::size_t size() const { return shape.size(); }
  double operator[](std::size_t i) const { return data[i]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * shape.cols + c]; }
  double scalar() const { return data[0]; }
  std::span<const double> values() const { return {data, size()}; }
  Tensor to_tensor() const;
};

enum class Op : std::uint8_t {
  kParam,
  kRow,
  kConstant,
  kMatmul,
  kAdd,
  kHadamard,
  kScale,
  kScaleBy,
  kSigmoid,
  kTanh,
  kLog,
  kOneMinus,
  kClamp,
  kSum,
  kDot,
  kConcatRows,
  kNegLogSoftmax,
  kCosine,
  kMarginHinge,
};

const char* op_name(Op op);

class Graph {
 public:
  Graph();
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) noexcept;
  Graph& operator=(Graph&&) noexcept;
  ~Graph();

  /// Drops every node but keeps the arena capacity for the next pass.
  void clear();
  std::size_t node_count() const;

  // Leaves.
  Var param(Parameter& p);
  /// Row `index` of a parameter matrix as a column vector (embedding lookup).
  Var row(Parameter& table, std::size_t index);
  Var constant(const Tensor& t);
  Var constant(std::span<const double> values, Shape shape);
  Var zeros(Shape shape);

  // Primitives.
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var hadamard(Var a, Var b);
  /// alpha * a for a fixed real alpha.
  Var scale(Var a, double alpha);
  /// a * s where s is a 1x1 node (scalar-vector product).
  Var scale_by(Var a, Var s);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var log(Var a);
  Var one_minus(Var a);
  /// Entrywise clamp to [lo, hi]; gradient passes only strictly inside.
  Var clamp(Var a, double lo, double hi);
  /// Sum of all entries as 1x1.
  Var sum(Var a);
  /// Inner product of two equally shaped tensors as 1x1.
  Var dot(Var a, Var b);
  Var concat_rows(std::span<const Var> parts);
  /// -log softmax(scores)[label] for a column of scores.
  Var neg_log_softmax(Var scores, std::size_t label);
  /// a.b / (|a| |b|); throws DomainError on a zero-norm operand.
  Var cosine(Var a, Var b);
  /// sum over j != target of max(margin - s[target] + s[j], 0).
  Var margin_hinge(Var scores, std::size_t target, double margin);

  // Composites built from the primitives above.
  Var sub(Var a, Var b) { return add(a, scale(b, -1.0)); }
  /// Sum of a list of equally shaped nodes.
  Var add_n(std::span<const Var> parts);

  View value(Var v) const;
  /// Gradient buffer; empty view when the node does not carry a gradient.
  View gradient(Var v) const;
  Shape shape(Var v) const;
  double scalar(Var v) const;
  Op op(Var v) const;
  bool requires_grad(Var v) const;

  /// Accumulates d(root)/d(node) into every reachable node requiring a
  /// gradient, including Parameter::grad of the leaves. Root must be 1x1.
  void backward(Var root);

 private:
  struct Node;
  struct Arena;

  Node& node(Var v);
  const Node& node(Var v) const;
  Var push(Node n, std::span<const Var> inputs);
  double* alloc(std::size_t n);
  Var make_unary(Op op, Var a, double s0 = 0.0, double s1 = 0.0);
  void backward_node(const Node& n);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> inputs_;
  std::unique_ptr<Arena> arena_;
  bool backward_done_ = false;
};

}  // namespace occamnet
