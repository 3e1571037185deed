#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "occamnet/data.hpp"

using namespace occamnet;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(OCCAMNET_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "occamnet_test_cli";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  static std::string path(const std::string& name) { return (dir_ / name).string(); }
  static fs::path dir_;
};

fs::path Cli::dir_;

}  // namespace

TEST_F(Cli, GeneratesNeedleCorpus) {
  const Result r = run("gen-synthetic --task needle --seed 1 --n-examples 60 --seq-len 5 --vocab-size 12 --out " +
                       path("needle.tsv"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto records = parse_labeled_sequences(read_file(path("needle.tsv")));
  ASSERT_EQ(records.size(), 60u);
  for (const auto& rec : records) EXPECT_EQ(rec.tokens.size(), 5u);
}

TEST_F(Cli, GeneratesBabiCorpus) {
  const Result r = run("gen-synthetic --task babi --seed 2 --blocks 12 --out " + path("qa1.txt"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(parse_babi(read_file(path("qa1.txt"))).size(), 60u);
}

TEST_F(Cli, TrainEvalVisualizeSentiment) {
  ASSERT_EQ(run("gen-synthetic --task needle --seed 3 --n-examples 80 --seq-len 4 --vocab-size 10 --out " +
                path("sent.tsv"))
                .code,
            0);
  const Result train = run("train --task sentiment --train-file " + path("sent.tsv") +
                           " --hidden 4 --embed-dim 4 --max-epochs 2 --lambda-max 0.01 --regimen quad --t-max 2"
                           " --checkpoint " + path("sent.ckpt") + " --metrics-out " + path("sent.jsonl"));
  ASSERT_EQ(train.code, 0) << train.out;
  EXPECT_NE(train.out.find("validation"), std::string::npos);
  EXPECT_NE(read_file(path("sent.jsonl")).find("\"type\":\"final\""), std::string::npos);

  const Result eval = run("eval --checkpoint " + path("sent.ckpt") + " --split validation --out " + path("eval.json"));
  ASSERT_EQ(eval.code, 0) << eval.out;
  EXPECT_NE(read_file(path("eval.json")).find("\"accuracy\""), std::string::npos);

  const Result html = run("visualize --checkpoint " + path("sent.ckpt") +
                          " --split validation --example 1 --format html --out " + path("trace.html"));
  ASSERT_EQ(html.code, 0) << html.out;
  const std::string page = read_file(path("trace.html"));
  EXPECT_EQ(page.rfind("<!DOCTYPE html>", 0), 0u);
  EXPECT_NE(page.find("class=\"unit\""), std::string::npos);

  const Result ansi = run("visualize --checkpoint " + path("sent.ckpt") + " --split train --example 0 --format ansi");
  ASSERT_EQ(ansi.code, 0) << ansi.out;
  EXPECT_NE(ansi.out.find("\x1b[30;48;5;"), std::string::npos);

  EXPECT_NE(run("eval --checkpoint " + path("sent.ckpt") + " --split test").code, 0);
  EXPECT_NE(run("visualize --checkpoint " + path("sent.ckpt") + " --split validation --example 9999").code, 0);
}

TEST_F(Cli, TrainAndVisualizeBabi) {
  ASSERT_EQ(run("gen-synthetic --task babi --seed 4 --blocks 6 --out " + path("b.txt")).code, 0);
  const Result train = run("train --task babi --babi-file " + path("b.txt") +
                           " --lambda-word 0.001 --regimen linear --t-max 10 --seed 7 --max-epochs 1"
                           " --layers 2 --checkpoint " + path("b.ckpt") + " --metrics-out " + path("b.jsonl"));
  ASSERT_EQ(train.code, 0) << train.out;
  const std::string metrics = read_file(path("b.jsonl"));
  EXPECT_NE(metrics.find("\"lambda_word\":0.001"), std::string::npos);
  const Result vis = run("visualize --checkpoint " + path("b.ckpt") + " --split validation --example 0");
  ASSERT_EQ(vis.code, 0) << vis.out;
  EXPECT_NE(vis.out.find("opacity:"), std::string::npos);
  EXPECT_NE(vis.out.find("question:"), std::string::npos);
}

TEST_F(Cli, SweepWritesOneRowPerCell) {
  const Result r = run("sweep --task needle --needle-train 60 --needle-validation 20 --needle-test 20 --seq-len 4"
                       " --vocab-size 10 --max-epochs 1 --hidden 3,5 --lambda-max 0,0.01 --regimen flat,linear"
                       " --jobs 2 --out " + path("sweep.tsv"));
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string tsv = read_file(path("sweep.tsv"));
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 9);
  EXPECT_EQ(tsv.find("error"), std::string::npos);
}

TEST_F(Cli, GradCheckReportsPerSuite) {
  const Result r = run("grad-check --model gated-lstm --hidden 4 --input 3 --gate quad");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("gated-lstm"), std::string::npos);
  EXPECT_EQ(run("grad-check --model nope").code == 0, false);
}

TEST_F(Cli, BadInvocationsFail) {
  EXPECT_NE(run("").code, 0);
  EXPECT_NE(run("train --task chess").code, 0);
  EXPECT_NE(run("train --task needle --no-such-flag").code, 0);
  EXPECT_EQ(run("train --task babi --babi-file " + path("absent.txt")).code, 2);
  EXPECT_EQ(run("train --task sentiment").code, 2);
  EXPECT_EQ(run("eval --checkpoint " + path("absent.ckpt")).code, 2);
  EXPECT_NE(run("sweep --task needle").code, 0);
  EXPECT_NE(run("visualize --checkpoint x --format svg").code, 0);
}
