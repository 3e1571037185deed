#pragma once

// End-to-end pipelines behind the command line: resolve a run configuration,
// load or generate data, build the model, train, evaluate, trace, and sweep.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "occamnet/cells.hpp"
#include "occamnet/checkpoint.hpp"
#include "occamnet/data.hpp"
#include "occamnet/report.hpp"
#include "occamnet/training.hpp"

namespace occamnet {

enum class TaskKind { kSentiment, kParaphrase, kBabi, kNeedle };
const char* task_kind_name(TaskKind k);
TaskKind parse_task_kind(const std::string& text);

enum class ModelKind { kGated, kLstm };
const char* model_kind_name(ModelKind k);
ModelKind parse_model_kind(const std::string& text);

struct RunConfig {
  TaskKind task = TaskKind::kNeedle;
  ModelKind model = ModelKind::kGated;

  // Data.
  std::string train_file;
  std::string validation_file;
  std::string test_file;
  std::vector<std::string> augment_files;
  std::string babi_file;
  std::string babi_test_file;
  std::size_t babi_train_stories = 1000;
  double validation_fraction = 0.2;
  std::size_t min_count = 2;
  std::size_t needle_train = 2000;
  std::size_t needle_validation = 500;
  std::size_t needle_test = 500;
  std::size_t needle_seq_len = 20;
  std::size_t needle_vocab = 50;

  // Model. For bAbI, `hidden` sizes the fact model (or the plain reader) and
  // `layers` the High-Level stack.
  std::size_t embed_dim = 16;
  std::size_t hidden = 16;
  std::size_t layers = 1;
  std::size_t hl_hidden = 20;
  std::size_t decoder_hidden = 20;
  GateKind gate = GateKind::kLinear;
  bool use_question_state = false;
  bool question_first = false;
  double dropout = 0.0;
  double dropout_hl = 0.5;
  double threshold = 0.5;

  // Training. For bAbI the annealed weight is the word penalty: lambda_max
  // mirrors lambda_word there.
  TrainConfig train;

  // Outputs.
  std::string checkpoint;
  std::string metrics_out;

  /// Per-task defaults.
  static RunConfig defaults(TaskKind task, ModelKind model = ModelKind::kGated);
  /// Throws std::invalid_argument with an actionable message.
  void validate() const;

  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
};

/// A task with its data, vocabulary and freshly initialized parameters.
struct RunContext {
  RunConfig config;
  Vocabulary vocab;
  std::unique_ptr<Task> task;
};

/// Builds the task. When `vocab` is given (reloading a checkpoint) it is used
/// instead of building one from the training data.
RunContext make_run(const RunConfig& config, const std::optional<Vocabulary>& vocab = std::nullopt);

struct RunOutcome {
  TrainResult train;
  Metrics validation;
  std::optional<Metrics> test;
};

/// Trains, writes the metrics file and checkpoint when their paths are set,
/// and returns the final metrics of the restored best parameters.
RunOutcome train_run(const RunConfig& config);

/// Reloads a checkpoint together with its configuration and vocabulary.
/// `override_data` replaces the data paths of the stored configuration.
RunContext load_run(const std::filesystem::path& checkpoint, const std::optional<RunConfig>& override_data = {});

/// Metadata stored in the checkpoint: configuration plus vocabulary.
std::string checkpoint_metadata(const RunConfig& config, const Vocabulary& vocab);

std::string metrics_json(const Metrics& m);

// ---- sweep ----

struct SweepGrid {
  std::vector<double> lambda_max;
  std::vector<Regimen> regimens;
  std::vector<std::size_t> hidden;

  std::size_t size() const { return lambda_max.size() * regimens.size() * hidden.size(); }
};

struct SweepRow {
  std::size_t hidden = 0;
  double lambda_max = 0.0;
  Regimen regimen = Regimen::kFlat;
  double best_validation = 0.0;
  double test_metric = 0.0;
  double mean_gate = 0.0;
  /// Empty on success, otherwise the failure message.
  std::string error;
};

/// Cells are ordered hidden-major, then lambda, then regimen. Each cell trains
/// from `base` with the shared seed and its own outputs disabled.
std::vector<SweepRow> run_sweep(const RunConfig& base, const SweepGrid& grid, std::size_t jobs);
RunConfig sweep_cell_config(const RunConfig& base, std::size_t hidden, double lambda_max, Regimen regimen);
std::string sweep_tsv(const std::vector<SweepRow>& rows);

}  // namespace occamnet
