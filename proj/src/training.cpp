#include "occamnet/training.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "occamnet/kernels.hpp"

namespace occamnet {

AdaDeltaState AdaDeltaState::create(const ParameterRefs& params, double rho, double eps) {
  AdaDeltaState s;
  s.rho = rho;
  s.eps = eps;
  for (const Parameter* p : params) {
    s.sq_grad.emplace_back(p->value.shape());
    s.sq_delta.emplace_back(p->value.shape());
  }
  return s;
}

void adadelta_step(const ParameterRefs& params, AdaDeltaState& state) {
  if (state.sq_grad.size() != params.size() || state.sq_delta.size() != params.size()) {
    throw ShapeError("adadelta_step: state tracks " + std::to_string(state.sq_grad.size()) + " tensors for " +
                     std::to_string(params.size()) + " parameters");
  }
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    if (p.grad.shape() != p.value.shape() || state.sq_grad[i].shape() != p.value.shape() ||
        state.sq_delta[i].shape() != p.value.shape()) {
      throw ShapeError("adadelta_step: shape mismatch for '" + p.name + "' " + p.value.shape().str());
    }
    k.adadelta(p.value.data(), p.grad.data(), state.sq_grad[i].data(), state.sq_delta[i].data(), state.rho,
               state.eps, p.value.size());
  }
}

double global_grad_norm(const ParameterRefs& params) {
  const auto& k = kernels::active();
  double total = 0.0;
  for (const Parameter* p : params) total += k.dot(p->grad.data(), p->grad.data(), p->grad.size());
  return std::sqrt(total);
}

double clip_gradients(const ParameterRefs& params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    const auto& k = kernels::active();
    for (Parameter* p : params) k.scale(factor, p->grad.data(), p->grad.data(), p->grad.size());
  }
  return norm;
}

const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(const std::string& text) {
  if (text == "train") return Split::kTrain;
  if (text == "validation" || text == "val") return Split::kValidation;
  if (text == "test") return Split::kTest;
  throw std::invalid_argument("unknown split '" + text + "' (expected train|validation|test)");
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");
  if (max_epochs < 1) throw std::invalid_argument("train: max epochs must be >= 1");
  if (patience < 1) throw std::invalid_argument("train: patience must be >= 1");
  if (!(clip_norm > 0.0)) throw std::invalid_argument("train: clip norm must be > 0");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("train: rho must lie in (0, 1)");
  if (!(eps > 0.0)) throw std::invalid_argument("train: eps must be > 0");
  sparsity.validate();
  babi.validate();
}

namespace {

std::vector<Tensor> snapshot(const ParameterRefs& params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const Parameter* p : params) out.push_back(p->value);
  return out;
}

void restore(const ParameterRefs& params, const std::vector<Tensor>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

}  // namespace

TrainResult train_loop(Task& task, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  const std::size_t n_train = task.size(Split::kTrain);
  if (n_train == 0) throw std::invalid_argument("train: empty training split");
  if (task.size(Split::kValidation) == 0) throw std::invalid_argument("train: empty validation split");

  const ParameterRefs params = task.parameters();
  AdaDeltaState optimizer = AdaDeltaState::create(params, cfg.rho, cfg.eps);
  RngStream shuffle_rng = RngStream(cfg.seed).fork(1);
  RngStream dropout_rng = RngStream(cfg.seed).fork(2);

  TrainResult result;
  std::vector<Tensor> best = snapshot(params);
  bool have_best = false;
  std::size_t since_improvement = 0;
  std::vector<std::size_t> order(n_train);
  Graph graph;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lambda = lambda_at(cfg.sparsity, epoch);
    const LossWeights weights{rec.lambda, cfg.babi};

    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(std::span<std::size_t>(order));

    double gate_sum = 0.0;
    std::size_t gate_count = 0;
    bool finite = true;
    for (std::size_t start = 0; start < n_train && finite; start += cfg.batch_size) {
      const std::size_t end = std::min(start + cfg.batch_size, n_train);
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      for (Parameter* p : params) p->zero_grad();
      for (std::size_t b = start; b < end; ++b) {
        graph.clear();
        const ExampleLoss loss = task.example_loss(graph, order[b], weights, &dropout_rng);
        const double total = graph.scalar(loss.total);
        if (!std::isfinite(total)) {
          finite = false;
          break;
        }
        rec.train_loss += total;
        rec.task_loss += loss.task;
        rec.penalty += loss.penalty;
        gate_sum += loss.gate_sum;
        gate_count += loss.gate_count;
        graph.backward(graph.scale(loss.total, inv_batch));
      }
      if (!finite) break;
      clip_gradients(params, cfg.clip_norm);
      adadelta_step(params, optimizer);
    }
    if (!finite) {
      spdlog::warn("epoch {}: non-finite loss, restoring last finite checkpoint", epoch);
      restore(params, best);
      result.diverged = true;
      break;
    }

    const double n = static_cast<double>(n_train);
    rec.train_loss /= n;
    rec.task_loss /= n;
    rec.penalty /= n;
    rec.train_mean_gate = gate_count ? gate_sum / static_cast<double>(gate_count) : 0.0;
    const Metrics val = task.evaluate(Split::kValidation);
    rec.val_metric = val.accuracy;
    rec.val_mean_gate = val.mean_gate;
    // ties go to the later epoch
    rec.improved = !have_best || rec.val_metric >= result.best_metric;
    if (rec.improved) {
      best = snapshot(params);
      have_best = true;
      result.best_metric = rec.val_metric;
      result.best_epoch = epoch;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    spdlog::info("epoch {} lambda={:.6g} loss={:.6g} task={:.6g} penalty={:.6g} val={:.4f} gate={:.4f}", epoch,
                 rec.lambda, rec.train_loss, rec.task_loss, rec.penalty, rec.val_metric, rec.val_mean_gate);
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (since_improvement >= cfg.patience) {
      result.stopped_early = true;
      break;
    }
  }
  restore(params, best);
  return result;
}

}  // namespace occamnet
