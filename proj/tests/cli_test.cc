// Copyright 2026 The CDLM Workbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "gtest/gtest.h"

namespace cdlm {
namespace {

namespace fs = std::filesystem;

const std::string kBinary = CDLM_BINARY;
const std::string kCorpus = std::string(CDLM_FIXTURE_DIR) + "/crb_corpus";

struct RunResult {
  int code = -1;
  std::string output;
};

RunResult RunCli(const std::string& args) {
  const std::string cmd = kBinary + " " + args + " 2>&1";
  RunResult r;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.output.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path Scratch() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  fs::path p = fs::temp_directory_path() / (std::string("cdlm_cli_") + info->name());
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

nlohmann::json Manifest(const fs::path& dir) {
  return nlohmann::json::parse(Slurp(dir / "manifest.json"));
}

TEST(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(RunCli("--help").code, 0);
  EXPECT_EQ(RunCli("").code, 2);
  EXPECT_EQ(RunCli("no-such-command").code, 2);
  EXPECT_EQ(RunCli("train").code, 2);
  EXPECT_EQ(RunCli("eval-localize --checkpoint /nonexistent.ckpt --boards /nonexistent.txt").code, 2);
  EXPECT_EQ(RunCli("--isa sse9 grad-check").code, 2);
}

TEST(CliTest, SudokuGenIsReproducibleAndRecordsManifest) {
  const fs::path d = Scratch();
  ASSERT_EQ(RunCli("sudoku-gen --count 12 --seed 4 --split train --out " + (d / "a").string()).code, 0);
  ASSERT_EQ(RunCli("sudoku-gen --count 12 --seed 4 --split train --out " + (d / "b").string()).code, 0);
  EXPECT_EQ(Slurp(d / "a" / "train.txt"), Slurp(d / "b" / "train.txt"));
  const auto m = Manifest(d / "a");
  EXPECT_EQ(m.at("status"), "complete");
  EXPECT_EQ(m.at("subcommand"), "sudoku-gen");
  ASSERT_EQ(RunCli("sudoku-gen --count 12 --seed 4 --split eval --exclude " +
                (d / "a" / "train.txt").string() + " --out " + (d / "c").string())
                .code,
            0);
  EXPECT_NE(Slurp(d / "a" / "train.txt"), Slurp(d / "c" / "eval.txt"));
}

TEST(CliTest, GradCheckPassesAndFailsOnTolerance) {
  const fs::path d = Scratch();
  const RunResult ok = RunCli("grad-check --samples 64 --out " + (d / "ok").string());
  EXPECT_EQ(ok.code, 0) << ok.output;
  const auto j = nlohmann::json::parse(Slurp(d / "ok" / "grad_check.json"));
  EXPECT_TRUE(j.at("passed").get<bool>());
  const RunResult bad =
      RunCli("grad-check --samples 16 --tolerance 1e-30 --out " + (d / "bad").string());
  EXPECT_EQ(bad.code, 1);
  EXPECT_EQ(Manifest(d / "bad").at("status"), "incomplete");
}

TEST(CliTest, TrainThenEvaluateIsByteReproducible) {
  const fs::path d = Scratch();
  ASSERT_EQ(RunCli("sudoku-gen --count 40 --seed 1 --split train --out " + (d / "data").string()).code, 0);
  ASSERT_EQ(RunCli("sudoku-gen --count 6 --seed 1 --split eval --out " + (d / "data").string()).code, 0);
  const std::string train = "train --data " + (d / "data" / "train.txt").string() +
                            " --steps 12 --batch-size 4 --layers 1 --hidden 16 --heads 2"
                            " --mlp-ratio 2 --log-every 4 --seed 3 --out ";
  const RunResult t = RunCli(train + (d / "run").string());
  ASSERT_EQ(t.code, 0) << t.output;
  EXPECT_EQ(Manifest(d / "run").at("status"), "complete");
  ASSERT_TRUE(fs::exists(d / "run" / "model.ckpt"));
  ASSERT_EQ(RunCli(train + (d / "run2").string()).code, 0);
  EXPECT_EQ(Slurp(d / "run" / "model.ckpt"), Slurp(d / "run2" / "model.ckpt"));
  EXPECT_EQ(Slurp(d / "run" / "loss.csv"), Slurp(d / "run2" / "loss.csv"));

  const std::string common = " --checkpoint " + (d / "run" / "model.ckpt").string() +
                             " --boards " + (d / "data" / "eval.txt").string() +
                             " --seed 9 --out ";
  for (const std::string cmd : {"eval-localize", "eval-correct --T 2", "eval-complete --T 2"}) {
    const RunResult a = RunCli(cmd + common + (d / "e1").string());
    ASSERT_EQ(a.code, 0) << cmd << a.output;
    ASSERT_EQ(RunCli(cmd + common + (d / "e2").string()).code, 0);
    EXPECT_EQ(Slurp(d / "e1" / "metrics.csv"), Slurp(d / "e2" / "metrics.csv")) << cmd;
    EXPECT_EQ(Manifest(d / "e1").at("status"), "complete");
  }
  const RunResult rep = RunCli("report --inputs " + (d / "e1").string() + " " +
                            (d / "e2").string() + " --labels x y --out " +
                            (d / "rep").string());
  ASSERT_EQ(rep.code, 0) << rep.output;
  const std::string combined = Slurp(d / "rep" / "combined.csv");
  EXPECT_EQ(combined.rfind("run,", 0), 0u) << combined.substr(0, 80);
}

TEST(CliTest, CrbPipelineWithStubGraderAndOracle) {
  const fs::path d = Scratch();
  const RunResult g = RunCli("crb-gen --corpus " + kCorpus + " --seed 3 --n-replace 1 2 --out " +
                          (d / "gen").string());
  ASSERT_EQ(g.code, 0) << g.output;
  ASSERT_TRUE(fs::exists(d / "gen" / "instances.jsonl"));
  const RunResult e = RunCli("crb-eval --instances " + (d / "gen" / "instances.jsonl").string() +
                          " --protocol localization refinement --model oracle --out " +
                          (d / "eval").string());
  ASSERT_EQ(e.code, 0) << e.output;
  const std::string csv = Slurp(d / "eval" / "metrics.csv");
  EXPECT_NE(csv.find("pass_at_1,1,"), std::string::npos);
  EXPECT_EQ(csv.find("pass_at_1,0"), std::string::npos);

  const RunResult again = RunCli("crb-gen --corpus " + kCorpus +
                              " --seed 3 --n-replace 1 2 --out " + (d / "gen2").string());
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(Slurp(d / "gen" / "instances.jsonl"), Slurp(d / "gen2" / "instances.jsonl"));
}

TEST(CliTest, UnavailableExternalGraderFailsWithIncompleteManifest) {
  const fs::path d = Scratch();
  const RunResult r = RunCli("crb-gen --corpus " + kCorpus +
                          " --grader external --grader-cmd 'exit 0' --out " + (d / "gen").string());
  EXPECT_EQ(r.code, 1) << r.output;
  EXPECT_EQ(Manifest(d / "gen").at("status"), "incomplete");
}

TEST(CliTest, ExternalGraderWithoutCommandIsUsageError) {
  const fs::path d = Scratch();
  const std::string cmd = "env -u CDLM_GRADER_CMD " + kBinary + " crb-gen --corpus " + kCorpus +
                          " --grader external --out " + (d / "gen").string() + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  EXPECT_EQ(WEXITSTATUS(status), 2);
}

}  // namespace
}  // namespace cdlm
