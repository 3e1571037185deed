#include "occamnet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "occamnet/kernels.hpp"

namespace occamnet {

struct Graph::Node {
  Op op = Op::kConstant;
  bool requires_grad = false;
  Shape shape;
  double* value = nullptr;
  double* grad = nullptr;
  std::uint32_t in_begin = 0;
  std::uint32_t in_count = 0;
  double s0 = 0.0;
  double s1 = 0.0;
  std::size_t index = 0;
};

// Chunked bump allocator. Blocks never move, so node buffers stay valid for
// the lifetime of the graph and are reused after clear().
struct Graph::Arena {
  static constexpr std::size_t kBlock = std::size_t{1} << 16;

  struct Block {
    std::unique_ptr<double[]> data;
    std::size_t size;
  };
  std::vector<Block> blocks;
  std::size_t current = 0;
  std::size_t offset = 0;

  double* take(std::size_t n) {
    while (current < blocks.size()) {
      if (blocks[current].size - offset >= n) {
        double* p = blocks[current].data.get() + offset;
        offset += n;
        return p;
      }
      ++current;
      offset = 0;
    }
    const std::size_t size = std::max(kBlock, n);
    blocks.push_back({std::make_unique<double[]>(size), size});
    current = blocks.size() - 1;
    offset = n;
    return blocks.back().data.get();
  }

  void reset() {
    current = 0;
    offset = 0;
  }
};

const char* op_name(Op op) {
  switch (op) {
    case Op::kParam: return "param";
    case Op::kRow: return "row";
    case Op::kConstant: return "constant";
    case Op::kMatmul: return "matmul";
    case Op::kAdd: return "add";
    case Op::kHadamard: return "hadamard";
    case Op::kScale: return "scale";
    case Op::kScaleBy: return "scale_by";
    case Op::kSigmoid: return "sigmoid";
    case Op::kTanh: return "tanh";
    case Op::kLog: return "log";
    case Op::kOneMinus: return "one_minus";
    case Op::kClamp: return "clamp";
    case Op::kSum: return "sum";
    case Op::kDot: return "dot";
    case Op::kConcatRows: return "concat_rows";
    case Op::kNegLogSoftmax: return "neg_log_softmax";
    case Op::kCosine: return "cosine";
    case Op::kMarginHinge: return "margin_hinge";
  }
  return "?";
}

Tensor View::to_tensor() const {
  Tensor t(shape);
  std::copy(data, data + size(), t.data());
  return t;
}

namespace {

inline double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

[[noreturn]] void shape_fail(const char* what, Shape a, Shape b) {
  throw ShapeError(std::string(what) + ": shape mismatch " + a.str() + " vs " + b.str());
}

}  // namespace

Graph::Graph() : arena_(std::make_unique<Arena>()) {}
Graph::Graph(Graph&&) noexcept = default;
Graph& Graph::operator=(Graph&&) noexcept = default;
Graph::~Graph() = default;

std::size_t Graph::node_count() const { return nodes_.size(); }

void Graph::clear() {
  nodes_.clear();
  inputs_.clear();
  arena_->reset();
  backward_done_ = false;
}

Graph::Node& Graph::node(Var v) {
  if (v.id() >= nodes_.size()) throw std::out_of_range("graph: invalid node handle");
  return nodes_[v.id()];
}

const Graph::Node& Graph::node(Var v) const {
  if (v.id() >= nodes_.size()) throw std::out_of_range("graph: invalid node handle");
  return nodes_[v.id()];
}

double* Graph::alloc(std::size_t n) { return arena_->take(n); }

Var Graph::push(Node n, std::span<const Var> inputs) {
  n.in_begin = static_cast<std::uint32_t>(inputs_.size());
  n.in_count = static_cast<std::uint32_t>(inputs.size());
  for (Var in : inputs) {
    inputs_.push_back(in.id());
    n.requires_grad = n.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (n.value == nullptr) n.value = alloc(n.shape.size());
  if (n.requires_grad && n.grad == nullptr) {
    n.grad = alloc(n.shape.size());
    std::fill(n.grad, n.grad + n.shape.size(), 0.0);
  }
  nodes_.push_back(n);
  return Var(static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Graph::param(Parameter& p) {
  if (p.grad.shape() != p.value.shape()) p.grad = Tensor(p.value.shape());
  Node n;
  n.op = Op::kParam;
  n.requires_grad = true;
  n.shape = p.value.shape();
  n.value = p.value.data();
  n.grad = p.grad.data();
  return push(n, {});
}

Var Graph::row(Parameter& table, std::size_t index) {
  if (index >= table.value.rows()) {
    throw std::out_of_range("row: index " + std::to_string(index) + " outside " + table.value.shape().str() +
                            " table '" + table.name + "'");
  }
  if (table.grad.shape() != table.value.shape()) table.grad = Tensor(table.value.shape());
  Node n;
  n.op = Op::kRow;
  n.requires_grad = true;
  n.shape = {table.value.cols(), 1};
  n.value = table.value.data() + index * table.value.cols();
  n.grad = table.grad.data() + index * table.value.cols();
  n.index = index;
  return push(n, {});
}

Var Graph::constant(std::span<const double> values, Shape shape) {
  if (values.size() != shape.size()) {
    throw ShapeError("constant: " + std::to_string(values.size()) + " values for shape " + shape.str());
  }
  Node n;
  n.op = Op::kConstant;
  n.shape = shape;
  n.value = alloc(shape.size());
  std::copy(values.begin(), values.end(), n.value);
  return push(n, {});
}

Var Graph::constant(const Tensor& t) { return constant(t.values(), t.shape()); }

Var Graph::zeros(Shape shape) {
  Node n;
  n.op = Op::kConstant;
  n.shape = shape;
  n.value = alloc(shape.size());
  std::fill(n.value, n.value + shape.size(), 0.0);
  return push(n, {});
}

Var Graph::matmul(Var a, Var b) {
  const Shape sa = shape(a);
  const Shape sb = shape(b);
  if (sa.cols != sb.rows) shape_fail("matmul", sa, sb);
  Node n;
  n.op = Op::kMatmul;
  n.shape = {sa.rows, sb.cols};
  n.value = alloc(n.shape.size());
  const auto& k = kernels::active();
  const double* av = node(a).value;
  const double* bv = node(b).value;
  if (sb.cols == 1) {
    for (std::size_t i = 0; i < sa.rows; ++i) n.value[i] = k.dot(av + i * sa.cols, bv, sa.cols);
  } else {
    std::fill(n.value, n.value + n.shape.size(), 0.0);
    for (std::size_t i = 0; i < sa.rows; ++i) {
      for (std::size_t p = 0; p < sa.cols; ++p) {
        k.axpy(av[i * sa.cols + p], bv + p * sb.cols, n.value + i * sb.cols, sb.cols);
      }
    }
  }
  const Var ins[] = {a, b};
  return push(n, ins);
}

Var Graph::add(Var a, Var b) {
  const Shape sa = shape(a);
  if (sa != shape(b)) shape_fail("add", sa, shape(b));
  Node n;
  n.op = Op::kAdd;
  n.shape = sa;
  n.value = alloc(sa.size());
  kernels::active().add(node(a).value, node(b).value, n.value, sa.size());
  const Var ins[] = {a, b};
  return push(n, ins);
}

Var Graph::hadamard(Var a, Var b) {
  const Shape sa = shape(a);
  if (sa != shape(b)) shape_fail("hadamard", sa, shape(b));
  Node n;
  n.op = Op::kHadamard;
  n.shape = sa;
  n.value = alloc(sa.size());
  kernels::active().mul(node(a).value, node(b).value, n.value, sa.size());
  const Var ins[] = {a, b};
  return push(n, ins);
}

Var Graph::make_unary(Op op, Var a, double s0, double s1) {
  Node n;
  n.op = op;
  n.shape = shape(a);
  n.s0 = s0;
  n.s1 = s1;
  n.value = alloc(n.shape.size());
  const double* in = node(a).value;
  double* out = n.value;
  const std::size_t size = n.shape.size();
  switch (op) {
    case Op::kScale: kernels::active().scale(s0, in, out, size); break;
    case Op::kSigmoid:
      for (std::size_t i = 0; i < size; ++i) out[i] = stable_sigmoid(in[i]);
      break;
    case Op::kTanh:
      for (std::size_t i = 0; i < size; ++i) out[i] = std::tanh(in[i]);
      break;
    case Op::kLog:
      for (std::size_t i = 0; i < size; ++i) {
        if (!(in[i] > 0.0)) throw DomainError("log: non-positive entry " + std::to_string(in[i]));
        out[i] = std::log(in[i]);
      }
      break;
    case Op::kOneMinus:
      for (std::size_t i = 0; i < size; ++i) out[i] = 1.0 - in[i];
      break;
    case Op::kClamp:
      for (std::size_t i = 0; i < size; ++i) out[i] = std::clamp(in[i], s0, s1);
      break;
    default: throw std::logic_error("make_unary: not a unary op");
  }
  const Var ins[] = {a};
  return push(n, ins);
}

Var Graph::scale(Var a, double alpha) { return make_unary(Op::kScale, a, alpha); }
Var Graph::sigmoid(Var a) { return make_unary(Op::kSigmoid, a); }
Var Graph::tanh(Var a) { return make_unary(Op::kTanh, a); }
Var Graph::log(Var a) { return make_unary(Op::kLog, a); }
Var Graph::one_minus(Var a) { return make_unary(Op::kOneMinus, a); }

Var Graph::clamp(Var a, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("clamp: lo > hi");
  return make_unary(Op::kClamp, a, lo, hi);
}

Var Graph::scale_by(Var a, Var s) {
  const Shape ss = shape(s);
  if (ss != Shape{1, 1}) shape_fail("scale_by (scalar operand)", shape(a), ss);
  Node n;
  n.op = Op::kScaleBy;
  n.shape = shape(a);
  n.value = alloc(n.shape.size());
  kernels::active().scale(node(s).value[0], node(a).value, n.value, n.shape.size());
  const Var ins[] = {a, s};
  return push(n, ins);
}

Var Graph::sum(Var a) {
  Node n;
  n.op = Op::kSum;
  n.shape = {1, 1};
  n.value = alloc(1);
  n.value[0] = kernels::active().sum(node(a).value, shape(a).size());
  const Var ins[] = {a};
  return push(n, ins);
}

Var Graph::dot(Var a, Var b) {
  const Shape sa = shape(a);
  if (sa != shape(b)) shape_fail("dot", sa, shape(b));
  Node n;
  n.op = Op::kDot;
  n.shape = {1, 1};
  n.value = alloc(1);
  n.value[0] = kernels::active().dot(node(a).value, node(b).value, sa.size());
  const Var ins[] = {a, b};
  return push(n, ins);
}

Var Graph::concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: empty part list");
  std::size_t rows = 0;
  for (Var p : parts) {
    const Shape s = shape(p);
    if (s.cols != 1) shape_fail("concat_rows (column vectors only)", s, Shape{s.rows, 1});
    rows += s.rows;
  }
  Node n;
  n.op = Op::kConcatRows;
  n.shape = {rows, 1};
  n.value = alloc(rows);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Node& src = node(p);
    std::copy(src.value, src.value + src.shape.rows, n.value + offset);
    offset += src.shape.rows;
  }
  return push(n, parts);
}

Var Graph::add_n(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("add_n: empty part list");
  Var acc = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) acc = add(acc, parts[i]);
  return acc;
}

Var Graph::neg_log_softmax(Var scores, std::size_t label) {
  const Shape s = shape(scores);
  if (s.cols != 1) shape_fail("neg_log_softmax (column of scores)", s, Shape{s.rows, 1});
  if (label >= s.rows) {
    throw std::out_of_range("neg_log_softmax: label " + std::to_string(label) + " >= " + std::to_string(s.rows));
  }
  const double* v = node(scores).value;
  const double top = *std::max_element(v, v + s.rows);
  double z = 0.0;
  for (std::size_t i = 0; i < s.rows; ++i) z += std::exp(v[i] - top);
  Node n;
  n.op = Op::kNegLogSoftmax;
  n.shape = {1, 1};
  n.index = label;
  n.value = alloc(1);
  n.value[0] = (top + std::log(z)) - v[label];
  const Var ins[] = {scores};
  return push(n, ins);
}

Var Graph::cosine(Var a, Var b) {
  const Shape sa = shape(a);
  if (sa != shape(b)) shape_fail("cosine", sa, shape(b));
  const auto& k = kernels::active();
  const double* av = node(a).value;
  const double* bv = node(b).value;
  const double na = std::sqrt(k.dot(av, av, sa.size()));
  const double nb = std::sqrt(k.dot(bv, bv, sa.size()));
  if (!(na > 0.0) || !(nb > 0.0)) throw DomainError("cosine: zero-norm operand");
  Node n;
  n.op = Op::kCosine;
  n.shape = {1, 1};
  n.value = alloc(1);
  n.value[0] = k.dot(av, bv, sa.size()) / (na * nb);
  n.s0 = na;
  n.s1 = nb;
  const Var ins[] = {a, b};
  return push(n, ins);
}

Var Graph::margin_hinge(Var scores, std::size_t target, double margin) {
  const Shape s = shape(scores);
  if (s.cols != 1) shape_fail("margin_hinge (column of scores)", s, Shape{s.rows, 1});
  if (target >= s.rows) {
    throw std::out_of_range("margin_hinge: target " + std::to_string(target) + " >= " + std::to_string(s.rows));
  }
  const double* v = node(scores).value;
  double total = 0.0;
  for (std::size_t j = 0; j < s.rows; ++j) {
    if (j != target) total += std::max(margin - v[target] + v[j], 0.0);
  }
  Node n;
  n.op = Op::kMarginHinge;
  n.shape = {1, 1};
  n.index = target;
  n.s0 = margin;
  n.value = alloc(1);
  n.value[0] = total;
  const Var ins[] = {scores};
  return push(n, ins);
}

View Graph::value(Var v) const {
  const Node& n = node(v);
  return {n.value, n.shape};
}

View Graph::gradient(Var v) const {
  const Node& n = node(v);
  if (n.grad == nullptr) return {nullptr, {0, 0}};
  return {n.grad, n.shape};
}

Shape Graph::shape(Var v) const { return node(v).shape; }
double Graph::scalar(Var v) const { return node(v).value[0]; }
Op Graph::op(Var v) const { return node(v).op; }
bool Graph::requires_grad(Var v) const { return node(v).requires_grad; }

void Graph::backward(Var root) {
  const Node& r = node(root);
  if (r.shape != Shape{1, 1}) throw ShapeError("backward: root must be 1x1, got " + r.shape.str());
  if (backward_done_) throw std::logic_error("backward: graph already differentiated; rebuild it");
  backward_done_ = true;
  if (!r.requires_grad) return;
  r.grad[0] += 1.0;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (n.requires_grad && n.in_count > 0) backward_node(n);
  }
}

void Graph::backward_node(const Node& n) {
  const auto& k = kernels::active();
  const std::uint32_t* in = inputs_.data() + n.in_begin;
  const double* g = n.grad;
  const std::size_t size = n.shape.size();
  auto input = [&](std::size_t j) -> const Node& { return nodes_[in[j]]; };

  switch (n.op) {
    case Op::kParam:
    case Op::kRow:
    case Op::kConstant: return;

    case Op::kMatmul: {
      const Node& a = input(0);
      const Node& b = input(1);
      const std::size_t m = a.shape.rows, inner = a.shape.cols, cols = b.shape.cols;
      if (a.requires_grad) {
        if (cols == 1) {
          for (std::size_t i = 0; i < m; ++i) k.axpy(g[i], b.value, a.grad + i * inner, inner);
        } else {
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < inner; ++p)
              a.grad[i * inner + p] += k.dot(g + i * cols, b.value + p * cols, cols);
        }
      }
      if (b.requires_grad) {
        if (cols == 1) {
          for (std::size_t i = 0; i < m; ++i) k.axpy(g[i], a.value + i * inner, b.grad, inner);
        } else {
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < inner; ++p)
              k.axpy(a.value[i * inner + p], g + i * cols, b.grad + p * cols, cols);
        }
      }
      return;
    }

    case Op::kAdd:
      for (std::size_t j = 0; j < 2; ++j)
        if (input(j).requires_grad) k.axpy(1.0, g, input(j).grad, size);
      return;

    case Op::kHadamard: {
      const Node& a = input(0);
      const Node& b = input(1);
      if (a.requires_grad) k.mul_add(g, b.value, a.grad, size);
      if (b.requires_grad) k.mul_add(g, a.value, b.grad, size);
      return;
    }

    case Op::kScale: {
      const Node& a = input(0);
      if (a.requires_grad) k.axpy(n.s0, g, a.grad, size);
      return;
    }

    case Op::kScaleBy: {
      const Node& a = input(0);
      const Node& s = input(1);
      if (a.requires_grad) k.axpy(s.value[0], g, a.grad, size);
      if (s.requires_grad) s.grad[0] += k.dot(g, a.value, size);
      return;
    }

    case Op::kSigmoid: {
      const Node& a = input(0);
      if (!a.requires_grad) return;
      for (std::size_t i = 0; i < size; ++i) a.grad[i] += g[i] * n.value[i] * (1.0 - n.value[i]);
      return;
    }

    case Op::kTanh: {
      const Node& a = input(0);
      if (!a.requires_grad) return;
      for (std::size_t i = 0; i < size; ++i) a.grad[i] += g[i] * (1.0 - n.value[i] * n.value[i]);
      return;
    }

    case Op::kLog: {
      const Node& a = input(0);
      if (!a.requires_grad) return;
      for (std::size_t i = 0; i < size; ++i) a.grad[i] += g[i] / a.value[i];
      return;
    }

    case Op::kOneMinus: {
      const Node& a = input(0);
      if (a.requires_grad) k.axpy(-1.0, g, a.grad, size);
      return;
    }

    case Op::kClamp: {
      const Node& a = input(0);
      if (!a.requires_grad) return;
      for (std::size_t i = 0; i < size; ++i)
        if (a.value[i] > n.s0 && a.value[i] < n.s1) a.grad[i] += g[i];
      return;
    }

    case Op::kSum: {
      const Node& a = input(0);
      if (!a.requires_grad) return;
      const double g0 = g[0];
      for (std::size_t i = 0; i < a.shape.size(); ++i) a.grad[i] += g0;
      return;
    }

    case Op::kDot: {
      const Node& a = input(0);
      const Node& b = input(1);
      const std::size_t len = a.shape.size();
      if (a.requires_grad) k.axpy(g[0], b.value, a.grad, len);
      if (b.requires_grad) k.axpy(g[0], a.value, b.grad, len);
      return;
    }

    case Op::kConcatRows: {
      std::size_t offset = 0;
      for (std::uint32_t j = 0; j < n.in_count; ++j) {
        const Node& part = input(j);
        if (part.requires_grad) k.axpy(1.0, g + offset, part.grad, part.shape.rows);
        offset += part.shape.rows;
      }
      return;
    }

    case Op::kNegLogSoftmax: {
      const Node& s = input(0);
      if (!s.requires_grad) return;
      const std::size_t rows = s.shape.rows;
      const double top = *std::max_element(s.value, s.value + rows);
      double z = 0.0;
      for (std::size_t i = 0; i < rows; ++i) z += std::exp(s.value[i] - top);
      for (std::size_t i = 0; i < rows; ++i) {
        const double p = std::exp(s.value[i] - top) / z;
        s.grad[i] += g[0] * (p - (i == n.index ? 1.0 : 0.0));
      }
      return;
    }

    case Op::kCosine: {
      const Node& a = input(0);
      const Node& b = input(1);
      const std::size_t len = a.shape.size();
      const double c = n.value[0];
      const double na = n.s0, nb = n.s1;
      if (a.requires_grad) {
        k.axpy(g[0] / (na * nb), b.value, a.grad, len);
        k.axpy(-g[0] * c / (na * na), a.value, a.grad, len);
      }
      if (b.requires_grad) {
        k.axpy(g[0] / (na * nb), a.value, b.grad, len);
        k.axpy(-g[0] * c / (nb * nb), b.value, b.grad, len);
      }
      return;
    }

    case Op::kMarginHinge: {
      const Node& s = input(0);
      if (!s.requires_grad) return;
      const std::size_t t = n.index;
      for (std::size_t j = 0; j < s.shape.rows; ++j) {
        if (j == t) continue;
        if (n.s0 - s.value[t] + s.value[j] > 0.0) {
          s.grad[j] += g[0];
          s.grad[t] -= g[0];
        }
      }
      return;
    }
  }
}

}  // namespace occamnet
