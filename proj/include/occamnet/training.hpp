#pragma once

// Optimizer, minibatch loop with epoch-wise sparsity annealing, and early
// stopping on a validation metric.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "occamnet/graph.hpp"
#include "occamnet/objectives.hpp"
#include "occamnet/report.hpp"
#include "occamnet/rng.hpp"

namespace occamnet {

struct AdaDeltaState {
  double rho = 0.95;
  double eps = 1e-6;
  std::vector<Tensor> sq_grad;
  std::vector<Tensor> sq_delta;

  static AdaDeltaState create(const ParameterRefs& params, double rho = 0.95, double eps = 1e-6);
};

/// E[g^2] <- rho E[g^2] + (1-rho) g^2
/// dx     = -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
/// E[dx^2] <- rho E[dx^2] + (1-rho) dx^2
/// Gradients are read from Parameter::grad. Throws ShapeError when the state
/// does not match the parameters.
void adadelta_step(const ParameterRefs& params, AdaDeltaState& state);

double global_grad_norm(const ParameterRefs& params);
/// Rescales all gradients so their global norm is at most max_norm.
/// Returns the norm before clipping.
double clip_gradients(const ParameterRefs& params, double max_norm);

enum class Split { kTrain, kValidation, kTest };
const char* split_name(Split s);
Split parse_split(const std::string& text);

struct Metrics {
  std::size_t examples = 0;
  double accuracy = 0.0;
  /// Only meaningful for pair tasks.
  double recall = 0.0;
  bool has_recall = false;
  /// Mean of every gate activation seen on the split; 0 for ungated models.
  double mean_gate = 0.0;
};

struct LossWeights {
  /// Annealed sparsity weight for this epoch.
  double lambda = 0.0;
  BabiLossConfig babi;
};

struct ExampleLoss {
  Var total;
  double task = 0.0;
  /// Weighted penalty terms included in total.
  double penalty = 0.0;
  double gate_sum = 0.0;
  std::size_t gate_count = 0;
};

/// A model bound to its data splits.
class Task {
 public:
  virtual ~Task() = default;

  virtual ParameterRefs parameters() = 0;
  virtual std::size_t size(Split split) const = 0;
  /// Builds the training loss of one example on a fresh graph.
  virtual ExampleLoss example_loss(Graph& g, std::size_t index, const LossWeights& weights,
                                   RngStream* dropout_rng) = 0;
  virtual Metrics evaluate(Split split) = 0;
  virtual GateTrace trace(Split split, std::size_t index) = 0;
};

struct TrainConfig {
  std::size_t batch_size = 50;
  std::size_t max_epochs = 30;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  SparsityConfig sparsity;
  BabiLossConfig babi;
  double clip_norm = 5.0;
  double rho = 0.95;
  double eps = 1e-6;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double lambda = 0.0;
  double train_loss = 0.0;
  double task_loss = 0.0;
  double penalty = 0.0;
  double train_mean_gate = 0.0;
  double val_metric = 0.0;
  double val_mean_gate = 0.0;
  bool improved = false;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_metric = 0.0;
  bool stopped_early = false;
  bool diverged = false;
  std::size_t epochs_run() const { return history.size(); }
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Epoch e (0-based) trains with lambda_at(cfg.sparsity, e) after a seeded
/// shuffle, averaging gradients over each minibatch, clipping, and taking one
/// AdaDelta step per batch. Validation accuracy is measured after every
/// epoch; the best parameters are kept and restored at the end, with ties
/// going to the later epoch. Training stops after `patience` consecutive
/// epochs below the best metric, at max_epochs, or on a
/// non-finite loss (diverged, best parameters restored).
TrainResult train_loop(Task& task, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace occamnet
