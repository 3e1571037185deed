#include "occamnet/run.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <stdexcept>
#include <thread>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "occamnet/tasks.hpp"

namespace occamnet {

using Json = nlohmann::ordered_json;

const char* task_kind_name(TaskKind k) {
  switch (k) {
    case TaskKind::kSentiment: return "sentiment";
    case TaskKind::kParaphrase: return "paraphrase";
    case TaskKind::kBabi: return "babi";
    case TaskKind::kNeedle: return "needle";
  }
  return "?";
}

TaskKind parse_task_kind(const std::string& text) {
  if (text == "sentiment") return TaskKind::kSentiment;
  if (text == "paraphrase") return TaskKind::kParaphrase;
  if (text == "babi") return TaskKind::kBabi;
  if (text == "needle") return TaskKind::kNeedle;
  throw std::invalid_argument("unknown task '" + text + "' (expected sentiment|paraphrase|babi|needle)");
}

const char* model_kind_name(ModelKind k) { return k == ModelKind::kGated ? "gated" : "lstm"; }

ModelKind parse_model_kind(const std::string& text) {
  if (text == "gated") return ModelKind::kGated;
  if (text == "lstm") return ModelKind::kLstm;
  throw std::invalid_argument("unknown model '" + text + "' (expected gated|lstm)");
}

RunConfig RunConfig::defaults(TaskKind task, ModelKind model) {
  RunConfig c;
  c.task = task;
  c.model = model;
  switch (task) {
    case TaskKind::kNeedle:
      c.embed_dim = 16;
      c.hidden = 16;
      c.dropout = 0.0;
      c.min_count = 1;
      c.train.batch_size = 10;
      break;
    case TaskKind::kSentiment:
    case TaskKind::kParaphrase:
      c.embed_dim = 100;
      c.hidden = 50;
      c.dropout = 0.3;
      break;
    case TaskKind::kBabi:
      c.embed_dim = 50;
      c.hidden = model == ModelKind::kGated ? 30 : 50;
      c.layers = model == ModelKind::kGated ? 6 : 1;
      c.gate = GateKind::kQuad;
      c.dropout = 0.3;
      c.train.max_epochs = 200;
      c.train.patience = 50;
      break;
  }
  return c;
}

void RunConfig::validate() const {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
  };
  need(embed_dim >= 1 && hidden >= 1 && layers >= 1 && hl_hidden >= 1 && decoder_hidden >= 1,
       "model sizes (--embed-dim, --hidden, --layers) must be >= 1");
  need(dropout >= 0.0 && dropout < 1.0, "--dropout must lie in [0, 1)");
  need(dropout_hl >= 0.0 && dropout_hl < 1.0, "--dropout-hl must lie in [0, 1)");
  need(validation_fraction > 0.0 && validation_fraction < 1.0, "validation fraction must lie in (0, 1)");
  need(min_count >= 1, "--min-count must be >= 1");
  switch (task) {
    case TaskKind::kNeedle:
      need(needle_seq_len >= 1, "--seq-len must be >= 1");
      need(needle_vocab > kSentimentClasses, "--vocab-size must exceed the number of classes (5)");
      need(needle_train >= 1 && needle_validation >= 1, "needle task needs nonempty train and validation sets");
      break;
    case TaskKind::kSentiment:
    case TaskKind::kParaphrase:
      need(!train_file.empty(), std::string("--train-file is required for --task ") + task_kind_name(task));
      break;
    case TaskKind::kBabi:
      need(!babi_file.empty(), "--babi-file is required for --task babi");
      need(babi_train_stories >= 2, "--babi-train-stories must be >= 2");
      need(!(question_first && use_question_state), "--question-first and --question-state are exclusive");
      break;
  }
  train.validate();
}

std::string RunConfig::to_json() const {
  Json j;
  j["task"] = task_kind_name(task);
  j["model"] = model_kind_name(model);
  j["train_file"] = train_file;
  j["validation_file"] = validation_file;
  j["test_file"] = test_file;
  j["augment_files"] = augment_files;
  j["babi_file"] = babi_file;
  j["babi_test_file"] = babi_test_file;
  j["babi_train_stories"] = babi_train_stories;
  j["validation_fraction"] = validation_fraction;
  j["min_count"] = min_count;
  j["needle_train"] = needle_train;
  j["needle_validation"] = needle_validation;
  j["needle_test"] = needle_test;
  j["needle_seq_len"] = needle_seq_len;
  j["needle_vocab"] = needle_vocab;
  j["embed_dim"] = embed_dim;
  j["hidden"] = hidden;
  j["layers"] = layers;
  j["hl_hidden"] = hl_hidden;
  j["decoder_hidden"] = decoder_hidden;
  j["gate"] = gate_kind_name(gate);
  j["use_question_state"] = use_question_state;
  j["question_first"] = question_first;
  j["dropout"] = dropout;
  j["dropout_hl"] = dropout_hl;
  j["threshold"] = threshold;
  j["batch_size"] = train.batch_size;
  j["max_epochs"] = train.max_epochs;
  j["patience"] = train.patience;
  j["seed"] = train.seed;
  j["lambda_max"] = train.sparsity.lambda_max;
  j["t_max"] = train.sparsity.t_max;
  j["regimen"] = regimen_name(train.sparsity.regimen);
  j["margin"] = train.babi.margin;
  j["mu_unsupporting"] = train.babi.mu_unsupporting;
  j["lambda_fact"] = train.babi.lambda_fact;
  j["lambda_word"] = train.babi.lambda_word;
  j["clip_norm"] = train.clip_norm;
  j["rho"] = train.rho;
  j["eps"] = train.eps;
  j["checkpoint"] = checkpoint;
  j["metrics_out"] = metrics_out;
  return j.dump();
}

RunConfig RunConfig::from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("run config is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("task") || !j.contains("model")) {
    throw std::invalid_argument("run config needs \"task\" and \"model\"");
  }
  RunConfig c = defaults(parse_task_kind(j.at("task").get<std::string>()),
                         parse_model_kind(j.at("model").get<std::string>()));
  auto opt = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    } catch (const Json::exception&) {
      throw std::invalid_argument(std::string("run config field \"") + key + "\" has the wrong type");
    }
  };
  opt("train_file", c.train_file);
  opt("validation_file", c.validation_file);
  opt("test_file", c.test_file);
  opt("augment_files", c.augment_files);
  opt("babi_file", c.babi_file);
  opt("babi_test_file", c.babi_test_file);
  opt("babi_train_stories", c.babi_train_stories);
  opt("validation_fraction", c.validation_fraction);
  opt("min_count", c.min_count);
  opt("needle_train", c.needle_train);
  opt("needle_validation", c.needle_validation);
  opt("needle_test", c.needle_test);
  opt("needle_seq_len", c.needle_seq_len);
  opt("needle_vocab", c.needle_vocab);
  opt("embed_dim", c.embed_dim);
  opt("hidden", c.hidden);
  opt("layers", c.layers);
  opt("hl_hidden", c.hl_hidden);
  opt("decoder_hidden", c.decoder_hidden);
  if (j.contains("gate")) c.gate = parse_gate_kind(j.at("gate").get<std::string>());
  opt("use_question_state", c.use_question_state);
  opt("question_first", c.question_first);
  opt("dropout", c.dropout);
  opt("dropout_hl", c.dropout_hl);
  opt("threshold", c.threshold);
  opt("batch_size", c.train.batch_size);
  opt("max_epochs", c.train.max_epochs);
  opt("patience", c.train.patience);
  opt("seed", c.train.seed);
  opt("lambda_max", c.train.sparsity.lambda_max);
  opt("t_max", c.train.sparsity.t_max);
  if (j.contains("regimen")) c.train.sparsity.regimen = parse_regimen(j.at("regimen").get<std::string>());
  opt("margin", c.train.babi.margin);
  opt("mu_unsupporting", c.train.babi.mu_unsupporting);
  opt("lambda_fact", c.train.babi.lambda_fact);
  opt("lambda_word", c.train.babi.lambda_word);
  opt("clip_norm", c.train.clip_norm);
  opt("rho", c.train.rho);
  opt("eps", c.train.eps);
  opt("checkpoint", c.checkpoint);
  opt("metrics_out", c.metrics_out);
  return c;
}

namespace {

std::string read_file(const std::string& path, const char* flag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(std::string("cannot read ") + flag + " '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Salts for the streams derived from the run seed; training owns 1 and 2.
constexpr std::uint64_t kInitSalt = 3;
constexpr std::uint64_t kNeedleTrainSalt = 10;
constexpr std::uint64_t kNeedleValidationSalt = 11;
constexpr std::uint64_t kNeedleTestSalt = 12;

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t salt) { return RngStream(seed).fork(salt).next_u64(); }

template <typename T>
void split_tail(std::vector<T>& train, std::vector<T>& validation, double fraction) {
  const std::size_t n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(train.size())));
  if (n_val == 0 || n_val >= train.size()) {
    throw std::invalid_argument("cannot reserve a validation split from " + std::to_string(train.size()) +
                                " training records");
  }
  validation.assign(train.end() - static_cast<std::ptrdiff_t>(n_val), train.end());
  train.resize(train.size() - n_val);
}

void check_vocab(const std::optional<Vocabulary>& given, const Vocabulary& expected) {
  if (given && !(*given == expected)) {
    throw CheckpointError("vocabulary mismatch: the checkpoint's " + std::to_string(given->size()) +
                          "-token vocabulary differs from the data's " + std::to_string(expected.size()));
  }
}

std::size_t max_answer_len(std::span<const Story> stories) {
  std::size_t n = 1;
  for (const auto& s : stories) n = std::max(n, s.answer.size());
  return n;
}

RunContext make_classification(const RunConfig& c, const std::optional<Vocabulary>& given) {
  RunContext ctx;
  Splits<LabeledSequence> splits;
  if (c.task == TaskKind::kNeedle) {
    ctx.vocab = needle_vocabulary(c.needle_vocab);
    check_vocab(given, ctx.vocab);
    const std::uint64_t s = c.train.seed;
    splits.train = gen_needle_task(derived_seed(s, kNeedleTrainSalt), c.needle_train, c.needle_seq_len, c.needle_vocab);
    splits.validation =
        gen_needle_task(derived_seed(s, kNeedleValidationSalt), c.needle_validation, c.needle_seq_len, c.needle_vocab);
    if (c.needle_test > 0) {
      splits.test = gen_needle_task(derived_seed(s, kNeedleTestSalt), c.needle_test, c.needle_seq_len, c.needle_vocab);
    }
  } else {
    auto train = parse_labeled_sequences(read_file(c.train_file, "--train-file"));
    std::vector<LabeledText> validation;
    if (c.validation_file.empty()) {
      split_tail(train, validation, c.validation_fraction);
    } else {
      validation = parse_labeled_sequences(read_file(c.validation_file, "--validation-file"));
    }
    std::vector<LabeledText> test;
    if (!c.test_file.empty()) test = parse_labeled_sequences(read_file(c.test_file, "--test-file"));
    if (given) {
      ctx.vocab = *given;
    } else {
      std::vector<Tokens> corpus;
      for (const auto& r : train) corpus.push_back(r.tokens);
      ctx.vocab = build_vocab(corpus, c.min_count);
    }
    for (const auto& r : train) splits.train.push_back(encode(r, ctx.vocab));
    for (const auto& r : validation) splits.validation.push_back(encode(r, ctx.vocab));
    for (const auto& r : test) splits.test.push_back(encode(r, ctx.vocab));
  }
  ClassifierConfig mc;
  mc.vocab_size = ctx.vocab.size();
  mc.embed_dim = c.embed_dim;
  mc.hidden = c.hidden;
  mc.layers = c.layers;
  mc.gated = c.model == ModelKind::kGated;
  mc.gate = c.gate;
  mc.dropout = c.dropout;
  RngStream init = RngStream(c.train.seed).fork(kInitSalt);
  ctx.task = std::make_unique<ClassificationTask>(ClassifierParams::create(mc, init), ctx.vocab, std::move(splits));
  return ctx;
}

RunContext make_paraphrase(const RunConfig& c, const std::optional<Vocabulary>& given) {
  RunContext ctx;
  auto train = parse_paraphrase_pairs(read_file(c.train_file, "--train-file"));
  std::vector<PairText> validation;
  if (c.validation_file.empty()) {
    split_tail(train, validation, c.validation_fraction);
  } else {
    validation = parse_paraphrase_pairs(read_file(c.validation_file, "--validation-file"));
  }
  for (const auto& path : c.augment_files) {
    auto extra = parse_paraphrase_augmentation(read_file(path, "--augment-file"));
    train.insert(train.end(), extra.begin(), extra.end());
  }
  std::vector<PairText> test;
  if (!c.test_file.empty()) test = parse_paraphrase_pairs(read_file(c.test_file, "--test-file"));
  if (given) {
    ctx.vocab = *given;
  } else {
    std::vector<Tokens> corpus;
    for (const auto& r : train) {
      corpus.push_back(r.a);
      corpus.push_back(r.b);
    }
    ctx.vocab = build_vocab(corpus, c.min_count);
  }
  Splits<ParaphrasePair> splits;
  for (const auto& r : train) splits.train.push_back(encode(r, ctx.vocab));
  for (const auto& r : validation) splits.validation.push_back(encode(r, ctx.vocab));
  for (const auto& r : test) splits.test.push_back(encode(r, ctx.vocab));
  PairModelConfig mc;
  mc.vocab_size = ctx.vocab.size();
  mc.embed_dim = c.embed_dim;
  mc.hidden = c.hidden;
  mc.layers = c.layers;
  mc.gated = c.model == ModelKind::kGated;
  mc.gate = c.gate;
  mc.dropout = c.dropout;
  mc.threshold = c.threshold;
  RngStream init = RngStream(c.train.seed).fork(kInitSalt);
  ctx.task = std::make_unique<ParaphraseTask>(PairParams::create(mc, init), ctx.vocab, std::move(splits));
  return ctx;
}

RunContext make_babi(const RunConfig& c, const std::optional<Vocabulary>& given) {
  RunContext ctx;
  auto train = parse_babi(read_file(c.babi_file, "--babi-file"));
  if (train.size() > c.babi_train_stories) train.resize(c.babi_train_stories);
  std::vector<TextStory> validation;
  split_tail(train, validation, c.validation_fraction);
  std::vector<TextStory> test;
  if (!c.babi_test_file.empty()) test = parse_babi(read_file(c.babi_test_file, "--babi-test-file"));
  if (given) {
    ctx.vocab = *given;
  } else {
    std::vector<Tokens> corpus;
    for (const auto& s : train) corpus.push_back(story_tokens(s));
    ctx.vocab = build_vocab(corpus, c.min_count);
  }
  Splits<Story> splits;
  for (const auto& s : train) splits.train.push_back(encode(s, ctx.vocab));
  for (const auto& s : validation) splits.validation.push_back(encode(s, ctx.vocab));
  for (const auto& s : test) splits.test.push_back(encode(s, ctx.vocab));
  const std::size_t max_len = max_answer_len(splits.train);
  RngStream init = RngStream(c.train.seed).fork(kInitSalt);
  if (c.model == ModelKind::kGated) {
    HgLstmConfig mc;
    mc.vocab_size = ctx.vocab.size();
    mc.embed_dim = c.embed_dim;
    mc.fact_hidden = c.hidden;
    mc.hl_hidden = c.hl_hidden;
    mc.hl_layers = c.layers;
    mc.decoder_hidden = c.decoder_hidden;
    mc.gate = c.gate;
    mc.use_question_state = c.use_question_state;
    mc.question_first = c.question_first;
    mc.dropout_fact = c.dropout;
    mc.dropout_question = c.dropout;
    mc.dropout_hl = c.dropout_hl;
    ctx.task = std::make_unique<HgLstmTask>(HgLstmParams::create(mc, init), ctx.vocab, std::move(splits), max_len);
  } else {
    LstmReaderConfig mc;
    mc.vocab_size = ctx.vocab.size();
    mc.embed_dim = c.embed_dim;
    mc.hidden = c.hidden;
    mc.layers = c.layers;
    mc.decoder_hidden = c.decoder_hidden;
    mc.dropout = c.dropout;
    ctx.task = std::make_unique<LstmReaderTask>(LstmReaderParams::create(mc, init), ctx.vocab, std::move(splits), max_len);
  }
  return ctx;
}

Json metrics_object(const Metrics& m) {
  Json j;
  j["examples"] = m.examples;
  j["accuracy"] = m.accuracy;
  if (m.has_recall) j["recall"] = m.recall;
  j["mean_gate"] = m.mean_gate;
  return j;
}

}  // namespace

RunContext make_run(const RunConfig& config, const std::optional<Vocabulary>& vocab) {
  config.validate();
  RunContext ctx;
  switch (config.task) {
    case TaskKind::kNeedle:
    case TaskKind::kSentiment: ctx = make_classification(config, vocab); break;
    case TaskKind::kParaphrase: ctx = make_paraphrase(config, vocab); break;
    case TaskKind::kBabi: ctx = make_babi(config, vocab); break;
  }
  ctx.config = config;
  return ctx;
}

std::string metrics_json(const Metrics& m) { return metrics_object(m).dump(); }

std::string checkpoint_metadata(const RunConfig& config, const Vocabulary& vocab) {
  Json j;
  j["config"] = Json::parse(config.to_json());
  j["vocab"] = vocab.tokens();
  j["vocab_min_count"] = vocab.min_count();
  return j.dump();
}

RunOutcome train_run(const RunConfig& config) {
  RunContext ctx = make_run(config);
  std::ofstream metrics;
  if (!config.metrics_out.empty()) {
    metrics.open(config.metrics_out, std::ios::binary | std::ios::trunc);
    if (!metrics) throw std::runtime_error("cannot write --metrics-out '" + config.metrics_out + "'");
    Json header;
    header["type"] = "config";
    header["config"] = Json::parse(config.to_json());
    metrics << header.dump() << '\n';
  }
  auto on_epoch = [&](const EpochRecord& r) {
    if (!metrics.is_open()) return;
    Json j;
    j["type"] = "epoch";
    j["epoch"] = r.epoch;
    j["lambda"] = r.lambda;
    j["train_loss"] = r.train_loss;
    j["task_loss"] = r.task_loss;
    j["penalty"] = r.penalty;
    j["train_mean_gate"] = r.train_mean_gate;
    j["val_metric"] = r.val_metric;
    j["val_mean_gate"] = r.val_mean_gate;
    j["improved"] = r.improved;
    metrics << j.dump() << '\n';
    metrics.flush();
  };

  RunOutcome out;
  out.train = train_loop(*ctx.task, config.train, on_epoch);
  out.validation = ctx.task->evaluate(Split::kValidation);
  if (ctx.task->size(Split::kTest) > 0) out.test = ctx.task->evaluate(Split::kTest);

  if (metrics.is_open()) {
    Json j;
    j["type"] = "final";
    j["best_epoch"] = out.train.best_epoch;
    j["best_metric"] = out.train.best_metric;
    j["epochs_run"] = out.train.epochs_run();
    j["stopped_early"] = out.train.stopped_early;
    j["diverged"] = out.train.diverged;
    j["validation"] = metrics_object(out.validation);
    if (out.test) j["test"] = metrics_object(*out.test);
    metrics << j.dump() << '\n';
    if (!metrics) throw std::runtime_error("failed writing --metrics-out '" + config.metrics_out + "'");
  }
  if (!config.checkpoint.empty()) {
    write_checkpoint(config.checkpoint,
                     snapshot_parameters(ctx.task->parameters(), checkpoint_metadata(config, ctx.vocab)));
  }
  return out;
}

RunContext load_run(const std::filesystem::path& checkpoint, const std::optional<RunConfig>& override_data) {
  const Checkpoint ckpt = read_checkpoint(checkpoint);
  Json meta;
  try {
    meta = Json::parse(ckpt.metadata);
  } catch (const std::exception& e) {
    throw CheckpointError("checkpoint metadata is not valid JSON: " + std::string(e.what()));
  }
  if (!meta.contains("config") || !meta.contains("vocab")) {
    throw CheckpointError("checkpoint metadata lacks the run configuration or vocabulary");
  }
  RunConfig config = RunConfig::from_json(meta.at("config").dump());
  if (override_data) {
    auto take = [](std::string& dst, const std::string& src) {
      if (!src.empty()) dst = src;
    };
    take(config.train_file, override_data->train_file);
    take(config.validation_file, override_data->validation_file);
    take(config.test_file, override_data->test_file);
    take(config.babi_file, override_data->babi_file);
    take(config.babi_test_file, override_data->babi_test_file);
  }
  const Vocabulary vocab = Vocabulary::from_tokens(meta.at("vocab").get<Tokens>(),
                                                   meta.value("vocab_min_count", std::size_t{1}));
  if (const NamedTensor* emb = ckpt.find("embeddings"); emb && emb->value.rows() != vocab.size()) {
    throw CheckpointError("vocabulary mismatch: " + std::to_string(vocab.size()) + " tokens but " +
                          std::to_string(emb->value.rows()) + " embedding rows");
  }
  RunContext ctx = make_run(config, vocab);
  load_parameters(ckpt, ctx.task->parameters());
  return ctx;
}

// ---- sweep ----

RunConfig sweep_cell_config(const RunConfig& base, std::size_t hidden, double lambda_max, Regimen regimen) {
  RunConfig c = base;
  c.hidden = hidden;
  c.train.sparsity.lambda_max = lambda_max;
  c.train.sparsity.regimen = regimen;
  if (c.task == TaskKind::kBabi) c.train.babi.lambda_word = lambda_max;
  c.checkpoint.clear();
  c.metrics_out.clear();
  return c;
}

std::vector<SweepRow> run_sweep(const RunConfig& base, const SweepGrid& grid, std::size_t jobs) {
  if (grid.size() == 0) throw std::invalid_argument("sweep: every grid axis needs at least one value");
  std::vector<SweepRow> rows(grid.size());
  std::size_t i = 0;
  for (std::size_t h : grid.hidden)
    for (double l : grid.lambda_max)
      for (Regimen r : grid.regimens) {
        rows[i].hidden = h;
        rows[i].lambda_max = l;
        rows[i++].regimen = r;
      }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < rows.size(); k = next++) {
      SweepRow& row = rows[k];
      try {
        const RunOutcome out = train_run(sweep_cell_config(base, row.hidden, row.lambda_max, row.regimen));
        row.best_validation = out.train.best_metric;
        row.test_metric = out.test ? out.test->accuracy : std::numeric_limits<double>::quiet_NaN();
        row.mean_gate = out.test ? out.test->mean_gate : out.validation.mean_gate;
      } catch (const std::exception& e) {
        row.error = e.what();
        spdlog::error("sweep cell {} failed: {}", k, e.what());
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, rows.size()));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  return rows;
}

std::string sweep_tsv(const std::vector<SweepRow>& rows) {
  std::string out = "hidden\tlambda_max\tregimen\tbest_validation\ttest_metric\tmean_gate\tstatus\n";
  char buf[256];
  for (const auto& r : rows) {
    std::string status = "ok";
    if (!r.error.empty()) {
      status = "error: " + r.error;
      for (char& ch : status)
        if (ch == '\t' || ch == '\n' || ch == '\r') ch = ' ';
    }
    if (r.error.empty()) {
      std::snprintf(buf, sizeof buf, "%zu\t%.17g\t%s\t%.6f\t%.6f\t%.6f\t", r.hidden, r.lambda_max,
                    regimen_name(r.regimen), r.best_validation, r.test_metric, r.mean_gate);
    } else {
      std::snprintf(buf, sizeof buf, "%zu\t%.17g\t%s\tnan\tnan\tnan\t", r.hidden, r.lambda_max, regimen_name(r.regimen));
    }
    out += buf + status + "\n";
  }
  return out;
}

}  // namespace occamnet
