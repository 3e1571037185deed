// occamnet: train, evaluate, sweep and inspect sparsity-gated LSTMs.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "occamnet/data.hpp"
#include "occamnet/grad_suites.hpp"
#include "occamnet/kernels.hpp"
#include "occamnet/run.hpp"

using namespace occamnet;

namespace {

// Flags shared by train and sweep. Unset optionals keep the task defaults.
struct RunFlags {
  std::string task;
  std::string model = "gated";
  std::string train_file, validation_file, test_file, babi_file, babi_test_file;
  std::vector<std::string> augment_files;
  std::optional<std::size_t> babi_train_stories, min_count;
  std::optional<std::size_t> needle_train, needle_validation, needle_test, seq_len, vocab_size;
  std::optional<std::size_t> embed_dim, hidden, layers, hl_hidden, decoder_hidden;
  std::optional<std::string> gate;
  bool question_state = false;
  bool question_first = false;
  std::optional<double> dropout, dropout_hl, threshold;
  std::optional<double> lambda_max, lambda_fact, lambda_word, mu_unsupporting, margin;
  std::optional<double> adadelta_rho, adadelta_eps, clip_norm;
  std::optional<std::string> regimen;
  std::optional<std::size_t> t_max, batch_size, max_epochs, patience;
  std::optional<std::uint64_t> seed;
  std::string checkpoint, metrics_out;
};

void add_data_flags(CLI::App* app, RunFlags& f) {
  app->add_option("--train-file", f.train_file, "Training TSV (sentiment: label<TAB>text; paraphrase: score<TAB>a<TAB>b)");
  app->add_option("--validation-file", f.validation_file, "Validation TSV (default: last 20% of the training file)");
  app->add_option("--test-file", f.test_file, "Test TSV");
  app->add_option("--babi-file", f.babi_file, "bAbI training file");
  app->add_option("--babi-test-file", f.babi_test_file, "bAbI test file");
}

void add_run_flags(CLI::App* app, RunFlags& f, bool sweep) {
  app->add_option("--task", f.task, "sentiment|paraphrase|babi|needle")
      ->required()
      ->check(CLI::IsMember({"sentiment", "paraphrase", "babi", "needle"}));
  app->add_option("--model", f.model, "gated|lstm")->check(CLI::IsMember({"gated", "lstm"}));
  add_data_flags(app, f);
  app->add_option("--augment-file", f.augment_files, "Extra paraphrase pairs (one per line: a<TAB>b), target 1");
  app->add_option("--babi-train-stories", f.babi_train_stories, "Stories read from the bAbI file (default 1000)");
  app->add_option("--min-count", f.min_count, "Minimum training frequency to keep a word");
  app->add_option("--needle-train", f.needle_train, "Needle training examples (default 2000)");
  app->add_option("--needle-validation", f.needle_validation, "Needle validation examples (default 500)");
  app->add_option("--needle-test", f.needle_test, "Needle test examples (default 500)");
  app->add_option("--seq-len", f.seq_len, "Needle sequence length (default 20)");
  app->add_option("--vocab-size", f.vocab_size, "Needle vocabulary size (default 50)");
  app->add_option("--embed-dim", f.embed_dim, "Embedding size");
  if (!sweep) app->add_option("--hidden", f.hidden, "Hidden size (bAbI: fact model or plain reader)");
  app->add_option("--layers", f.layers, "LSTM depth (bAbI: High-Level stack)");
  app->add_option("--hl-hidden", f.hl_hidden, "bAbI High-Level hidden size (default 20)");
  app->add_option("--decoder-hidden", f.decoder_hidden, "bAbI answer decoder hidden size (default 20)");
  app->add_option("--gate", f.gate, "linear|quad")->check(CLI::IsMember({"linear", "quad"}));
  app->add_flag("--question-state", f.question_state, "bAbI: also feed the question model's final state");
  app->add_flag("--question-first", f.question_first, "bAbI: the High-Level model reads the question before the facts");
  app->add_option("--dropout", f.dropout, "Dropout on non-recurrent inputs");
  app->add_option("--dropout-hl", f.dropout_hl, "bAbI High-Level dropout (default 0.5)");
  app->add_option("--threshold", f.threshold, "Paraphrase decision threshold on cosine (default 0.5)");
  if (!sweep) {
    app->add_option("--lambda-max", f.lambda_max, "Final sparsity penalty weight");
    app->add_option("--regimen", f.regimen, "flat|linear|quad")->check(CLI::IsMember({"flat", "linear", "quad"}));
  }
  app->add_option("--t-max", f.t_max, "Epoch at which the penalty reaches lambda-max");
  app->add_option("--lambda-fact", f.lambda_fact, "bAbI fact-selection weight");
  app->add_option("--lambda-word", f.lambda_word, "bAbI word-gate weight (annealed; same as --lambda-max)");
  app->add_option("--mu-unsupporting", f.mu_unsupporting, "bAbI weight of non-supporting facts (default 0.1)");
  app->add_option("--margin", f.margin, "bAbI prediction margin (default 1)");
  app->add_option("--batch-size", f.batch_size, "Minibatch size");
  app->add_option("--adadelta-rho", f.adadelta_rho, "AdaDelta decay (default 0.95)");
  app->add_option("--adadelta-eps", f.adadelta_eps, "AdaDelta epsilon (default 1e-6)");
  app->add_option("--clip-norm", f.clip_norm, "Global gradient-norm clip (default 5)");
  app->add_option("--max-epochs", f.max_epochs, "Epoch limit");
  app->add_option("--patience", f.patience, "Early-stopping patience in epochs");
  app->add_option("--seed", f.seed, "Seed for data generation, initialization, shuffling and dropout");
  if (!sweep) {
    app->add_option("--checkpoint", f.checkpoint, "Checkpoint output path");
    app->add_option("--metrics-out", f.metrics_out, "Metrics output path (JSON lines)");
  }
}

template <typename T, typename U>
void apply(const std::optional<T>& flag, U& field) {
  if (flag) field = *flag;
}

RunConfig resolve(const RunFlags& f) {
  const TaskKind task = parse_task_kind(f.task);
  RunConfig c = RunConfig::defaults(task, parse_model_kind(f.model));
  c.train_file = f.train_file;
  c.validation_file = f.validation_file;
  c.test_file = f.test_file;
  c.augment_files = f.augment_files;
  c.babi_file = f.babi_file;
  c.babi_test_file = f.babi_test_file;
  apply(f.babi_train_stories, c.babi_train_stories);
  apply(f.min_count, c.min_count);
  apply(f.needle_train, c.needle_train);
  apply(f.needle_validation, c.needle_validation);
  apply(f.needle_test, c.needle_test);
  apply(f.seq_len, c.needle_seq_len);
  apply(f.vocab_size, c.needle_vocab);
  apply(f.embed_dim, c.embed_dim);
  apply(f.hidden, c.hidden);
  apply(f.layers, c.layers);
  apply(f.hl_hidden, c.hl_hidden);
  apply(f.decoder_hidden, c.decoder_hidden);
  if (f.gate) c.gate = parse_gate_kind(*f.gate);
  c.use_question_state = f.question_state;
  c.question_first = f.question_first;
  apply(f.dropout, c.dropout);
  apply(f.dropout_hl, c.dropout_hl);
  apply(f.threshold, c.threshold);
  apply(f.lambda_max, c.train.sparsity.lambda_max);
  if (f.regimen) c.train.sparsity.regimen = parse_regimen(*f.regimen);
  apply(f.t_max, c.train.sparsity.t_max);
  apply(f.lambda_fact, c.train.babi.lambda_fact);
  apply(f.mu_unsupporting, c.train.babi.mu_unsupporting);
  apply(f.margin, c.train.babi.margin);
  apply(f.batch_size, c.train.batch_size);
  apply(f.adadelta_rho, c.train.rho);
  apply(f.adadelta_eps, c.train.eps);
  apply(f.clip_norm, c.train.clip_norm);
  apply(f.max_epochs, c.train.max_epochs);
  apply(f.patience, c.train.patience);
  apply(f.seed, c.train.seed);
  if (f.lambda_word) {
    if (task != TaskKind::kBabi) throw std::invalid_argument("--lambda-word applies only to --task babi");
    c.train.sparsity.lambda_max = *f.lambda_word;
  }
  if (task == TaskKind::kBabi) c.train.babi.lambda_word = c.train.sparsity.lambda_max;
  c.checkpoint = f.checkpoint;
  c.metrics_out = f.metrics_out;
  c.validate();
  return c;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write --out '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::optional<RunConfig> data_override(const RunFlags& f) {
  RunConfig c;
  c.train_file = f.train_file;
  c.validation_file = f.validation_file;
  c.test_file = f.test_file;
  c.babi_file = f.babi_file;
  c.babi_test_file = f.babi_test_file;
  return c;
}

Split default_split(Task& task, const std::optional<std::string>& requested) {
  if (requested) return parse_split(*requested);
  return task.size(Split::kTest) > 0 ? Split::kTest : Split::kValidation;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("occamnet");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("OCCAMNET_LOG")) spdlog::cfg::helpers::load_levels(env);
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Sparsity-gated LSTMs: train, evaluate, sweep and visualize gate activations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "occamnet 1.0");

  RunFlags train_flags;
  auto* train = app.add_subcommand("train", "Train a model, writing a checkpoint and a metrics file");
  add_run_flags(train, train_flags, false);

  RunFlags eval_flags;
  std::string eval_checkpoint, eval_out;
  std::optional<std::string> eval_split;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a data split");
  eval->add_option("--checkpoint", eval_checkpoint, "Checkpoint to evaluate")->required();
  eval->add_option("--split", eval_split, "train|validation|test (default: test when present)");
  eval->add_option("--out", eval_out, "Write the metrics JSON here instead of stdout");
  add_data_flags(eval, eval_flags);

  RunFlags sweep_flags;
  std::vector<std::size_t> sweep_hidden;
  std::vector<double> sweep_lambda{0.0, 1e-4, 1e-3, 1e-2};
  std::vector<std::string> sweep_regimens{"flat"};
  std::string sweep_out;
  std::size_t jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "Train every cell of a lambda-max x regimen x hidden grid");
  add_run_flags(sweep, sweep_flags, true);
  sweep->add_option("--hidden", sweep_hidden, "Hidden sizes (comma separated)")->delimiter(',');
  sweep->add_option("--lambda-max", sweep_lambda, "Penalty weights (comma separated)")->delimiter(',')->capture_default_str();
  sweep->add_option("--regimen", sweep_regimens, "Regimens (comma separated)")
      ->delimiter(',')
      ->check(CLI::IsMember({"flat", "linear", "quad"}))
      ->capture_default_str();
  sweep->add_option("--out", sweep_out, "Results TSV")->required();
  sweep->add_option("--jobs", jobs, "Cells trained concurrently")->check(CLI::PositiveNumber);

  RunFlags vis_flags;
  std::string vis_checkpoint, vis_out, vis_format = "html";
  std::optional<std::string> vis_split;
  std::size_t vis_example = 0;
  auto* vis = app.add_subcommand("visualize", "Render the gate activations of one example");
  vis->add_option("--checkpoint", vis_checkpoint, "Checkpoint of a gated model")->required();
  vis->add_option("--example", vis_example, "Example index within the split");
  vis->add_option("--split", vis_split, "train|validation|test (default: test when present)");
  vis->add_option("--format", vis_format, "html|ansi")->check(CLI::IsMember({"html", "ansi"}));
  vis->add_option("--out", vis_out, "Output file (default stdout)");
  add_data_flags(vis, vis_flags);

  std::string gen_task, gen_out;
  std::uint64_t gen_seed = 0;
  std::size_t gen_examples = 2000, gen_seq_len = 20, gen_vocab = 50, gen_blocks = 200;
  auto* gen = app.add_subcommand("gen-synthetic", "Generate a synthetic corpus");
  gen->add_option("--task", gen_task, "needle (labeled TSV) | babi (single supporting fact, bAbI layout)")
      ->required()
      ->check(CLI::IsMember({"needle", "babi"}));
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--n-examples", gen_examples, "Needle examples")->capture_default_str();
  gen->add_option("--seq-len", gen_seq_len, "Needle sequence length")->capture_default_str();
  gen->add_option("--vocab-size", gen_vocab, "Needle vocabulary size")->capture_default_str();
  gen->add_option("--blocks", gen_blocks, "bAbI blocks of five questions each")->capture_default_str();
  gen->add_option("--out", gen_out, "Output file (default stdout)");

  std::string gc_model;
  GradSuiteOptions gc;
  std::string gc_gate = "quad";
  auto* gcheck = app.add_subcommand("grad-check", "Compare analytic gradients with central differences");
  gcheck->add_option("--model", gc_model, "primitives|lstm|gated-lstm|stacked|hg-lstm|all")
      ->required()
      ->check(CLI::IsMember({"primitives", "lstm", "gated-lstm", "stacked", "hg-lstm", "all"}));
  gcheck->add_option("--input", gc.input, "Input size")->capture_default_str();
  gcheck->add_option("--hidden", gc.hidden, "Hidden size")->capture_default_str();
  gcheck->add_option("--layers", gc.layers, "Depth of the stacked and High-Level models")->capture_default_str();
  gcheck->add_option("--steps", gc.steps, "Sequence length")->capture_default_str();
  gcheck->add_option("--gate", gc_gate, "linear|quad")->check(CLI::IsMember({"linear", "quad"}))->capture_default_str();
  gcheck->add_option("--seed", gc.seed, "Seed for parameters and inputs");
  gcheck->add_option("--step", gc.step, "Finite-difference step")->capture_default_str();
  gcheck->add_option("--tolerance", gc.tolerance, "Relative error tolerance")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    spdlog::debug("kernels: {}", kernels::active().name);
    if (*train) {
      const RunConfig cfg = resolve(train_flags);
      const RunOutcome out = train_run(cfg);
      std::printf("best epoch %zu of %zu, validation %.4f", out.train.best_epoch, out.train.epochs_run(),
                  out.train.best_metric);
      if (out.test) std::printf(", test %.4f", out.test->accuracy);
      std::printf(", mean gate %.4f%s\n", out.validation.mean_gate, out.train.diverged ? " (diverged)" : "");
      return out.train.diverged ? 3 : 0;
    }
    if (*eval) {
      RunContext ctx = load_run(eval_checkpoint, data_override(eval_flags));
      const Split split = default_split(*ctx.task, eval_split);
      if (ctx.task->size(split) == 0) {
        throw std::invalid_argument(std::string("split '") + split_name(split) + "' is empty; pass its data file");
      }
      write_text(eval_out, metrics_json(ctx.task->evaluate(split)) + "\n");
      return 0;
    }
    if (*sweep) {
      SweepGrid grid;
      grid.lambda_max = sweep_lambda;
      for (const auto& r : sweep_regimens) grid.regimens.push_back(parse_regimen(r));
      const RunConfig base = resolve(sweep_flags);
      grid.hidden = sweep_hidden.empty() ? std::vector<std::size_t>{base.hidden} : sweep_hidden;
      const auto rows = run_sweep(base, grid, jobs);
      write_text(sweep_out, sweep_tsv(rows));
      std::size_t failed = 0;
      for (const auto& r : rows) failed += !r.error.empty();
      if (failed) std::fprintf(stderr, "error: %zu of %zu sweep cells failed; see %s\n", failed, rows.size(), sweep_out.c_str());
      return failed ? 4 : 0;
    }
    if (*vis) {
      RunContext ctx = load_run(vis_checkpoint, data_override(vis_flags));
      const Split split = default_split(*ctx.task, vis_split);
      GateTrace trace = ctx.task->trace(split, vis_example);
      trace.meta.task = task_kind_name(ctx.config.task);
      trace.meta.checkpoint = std::filesystem::path(vis_checkpoint).filename().string();
      write_text(vis_out, render_heatmap(trace, parse_heatmap_format(vis_format)));
      return 0;
    }
    if (*gen) {
      if (gen_task == "needle") {
        const Vocabulary vocab = needle_vocabulary(gen_vocab);
        std::vector<LabeledText> records;
        for (const auto& ex : gen_needle_task(gen_seed, gen_examples, gen_seq_len, gen_vocab)) {
          records.push_back({vocab.decode(ex.tokens), ex.label});
        }
        write_text(gen_out, serialize_labeled_sequences(records));
      } else {
        write_text(gen_out, gen_babi_single_fact(gen_seed, gen_blocks));
      }
      return 0;
    }
    if (*gcheck) {
      gc.gate = parse_gate_kind(gc_gate);
      std::vector<std::string> models{gc_model};
      if (gc_model == "all") models = grad_suite_models();
      bool ok = true;
      for (const auto& m : models) {
        for (const auto& r : grad_suite(m, gc)) {
          std::printf("%s: %s\n", r.name.c_str(), r.report.summary().c_str());
          ok = ok && r.report.passed();
        }
      }
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
