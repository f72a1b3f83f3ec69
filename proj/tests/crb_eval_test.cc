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

#include "cdlm/crb/evaluation.h"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdlm/stub_models.h"
#include "gtest/gtest.h"

namespace cdlm::crb {
namespace {

const std::string kCorpusDir = std::string(CDLM_FIXTURE_DIR) + "/crb_corpus";

StubGrader CanonicalGrader(const std::vector<SourceTask>& tasks) {
  StubGrader g;
  for (const auto& t : tasks) g.AddCanonical(t.code, t.tests, t.entry_point);
  return g;
}

struct Bench {
  std::vector<SourceTask> tasks;
  std::vector<BenchmarkInstance> instances;
  CodeVocab vocab;
};

const Bench& FixtureBench() {
  static const Bench* bench = [] {
    auto* b = new Bench;
    b->tasks = LoadCorpus(kCorpusDir, "fixture");
    StubGrader g = CanonicalGrader(b->tasks);
    GenerationConfig cfg;
    cfg.seed = 3;
    b->instances = GenerateBenchmark(b->tasks, cfg, g).instances;
    b->vocab = CodeVocab::FromInstances(b->instances);
    return b;
  }();
  return *bench;
}

CorrectiveOracleDenoiser OracleFor(const Bench& b) {
  std::vector<TokenSequence> targets;
  for (const auto& t : b.tasks) targets.push_back(b.vocab.Encode(TokenizeClassify(t.code)));
  return CorrectiveOracleDenoiser(b.vocab.vocabulary(), targets);
}

TEST(CodeVocabTest, LayoutAndLookup) {
  const CodeVocab v({"b", "a", "+", "a"});
  EXPECT_EQ(v.size(), 5);
  EXPECT_EQ(v.Text(CodeVocab::kMaskId), "<mask>");
  EXPECT_EQ(v.Text(CodeVocab::kUnknownId), "<unk>");
  EXPECT_EQ(v.Id("+"), 2);
  EXPECT_EQ(v.Id("a"), 3);
  EXPECT_EQ(v.Id("b"), 4);
  EXPECT_EQ(v.Id("zzz"), CodeVocab::kUnknownId);
  EXPECT_EQ(v.vocabulary().mask_id(), 0);
  EXPECT_THROW(CodeVocab({"<mask>"}), std::invalid_argument);
  const CodeVocab back = CodeVocab::FromJson(v.ToJson());
  EXPECT_EQ(back.ToJson(), v.ToJson());
}

TEST(CodeVocabTest, EncodeDecodeRoundTrip) {
  const std::string src = "def f(a, b):  # c\n    return a + b\n";
  const auto toks = TokenizeClassify(src);
  std::vector<std::string> texts;
  for (const auto& t : toks) texts.push_back(t.text);
  const CodeVocab v(texts);
  const TokenSequence z = v.Encode(toks);
  EXPECT_EQ(z.size(), static_cast<int>(toks.size()));
  EXPECT_EQ(v.Decode(src, toks, z), src);
  TokenSequence swapped = z;
  swapped.Set(static_cast<int>(toks.size()) - 2, v.Id("a"));
  EXPECT_EQ(v.Decode(src, toks, swapped), "def f(a, b):  # c\n    return a a b\n");
}

TEST(CodeVocabTest, FromTasksIsClosedUnderCorruption) {
  const Bench& b = FixtureBench();
  const CodeVocab v = CodeVocab::FromTasks(b.tasks);
  for (const auto& inst : b.instances) {
    for (const auto& t : TokenizeClassify(inst.corrupted_code)) {
      ASSERT_NE(v.Id(t.text), CodeVocab::kUnknownId) << t.text;
    }
  }
}

TEST(BodyPositionsTest, StartsAfterSignatureColon) {
  const std::string src = "X = 1\ndef f(a: int) -> int:\n    return a + X\ny = 2\n";
  const auto toks = TokenizeClassify(src);
  const PositionSet body = BodyPositions(toks, "f");
  std::vector<std::string> texts;
  for (int i : body) texts.push_back(toks[static_cast<std::size_t>(i)].text);
  EXPECT_EQ(texts, (std::vector<std::string>{"return", "a", "+", "X"}));
  EXPECT_TRUE(BodyPositions(toks, "missing").empty());
}

TEST(LocalizationEvalTest, CorrectiveOracleFindsEveryError) {
  const Bench& b = FixtureBench();
  CorrectiveOracleDenoiser model = OracleFor(b);
  const CrbEvalResult r = RunLocalizationEval(model, b.vocab, b.instances, {1, 2, 3});
  EXPECT_TRUE(r.skipped.empty());
  for (int n = 1; n <= 5; ++n) {
    const std::map<std::string, std::string> k = {{"n_replace", std::to_string(n)},
                                                  {"error_type", "all"}};
    auto kk = k;
    kk["K"] = "1";
    EXPECT_DOUBLE_EQ(r.report.Get(kk, "hit_rate"), 1.0) << n;
    EXPECT_GT(r.report.Get(k, "gap"), 0.9);
  }
}

TEST(LocalizationEvalTest, UniformModelHasZeroGap) {
  const Bench& b = FixtureBench();
  UniformDenoiser model(b.vocab.vocabulary());
  const CrbEvalResult r = RunLocalizationEval(model, b.vocab, b.instances, {1});
  for (const auto& row : r.report.rows()) {
    if (row.metric == "gap" || row.metric == "gap_maxprob") {
      EXPECT_NEAR(row.value, 0.0, 1e-12);
    }
    if (row.metric == "confidence_ratio") EXPECT_NEAR(row.value, 1.0, 1e-12);
  }
}

TEST(RefinementEvalTest, OracleRepairsAndIdentityDoesNot) {
  const Bench& b = FixtureBench();
  StubGrader g = CanonicalGrader(b.tasks);
  CorrectiveOracleDenoiser oracle = OracleFor(b);
  const CrbEvalResult good = RunRefinementEval(oracle, b.vocab, b.instances, 0.9, {1, 2, 4}, g);
  IdentityDenoiser identity(b.vocab.vocabulary());
  const CrbEvalResult bad = RunRefinementEval(identity, b.vocab, b.instances, 0.9, {1, 2, 4}, g);
  for (int n = 1; n <= 5; ++n) {
    for (int t : {1, 2, 4}) {
      const std::map<std::string, std::string> k = {
          {"n_replace", std::to_string(n)}, {"T", std::to_string(t)}};
      EXPECT_DOUBLE_EQ(good.report.Get(k, "pass_at_1"), 1.0);
      EXPECT_DOUBLE_EQ(bad.report.Get(k, "pass_at_1"), 0.0);
    }
  }
}

TEST(RefinementEvalTest, BridgeFailuresAreSkippedNotFatal) {
  const Bench& b = FixtureBench();
  StubGrader g = CanonicalGrader(b.tasks);
  const std::string victim = b.instances.front().corrupted_code;
  const CodeVocab& vocab = b.vocab;
  CorrectiveOracleDenoiser oracle = OracleFor(b);
  const TokenSequence bad_input = vocab.Encode(TokenizeClassify(victim));
  FunctionDenoiser flaky(vocab.vocabulary(), [&](const TokenSequence& z) {
    if (z == bad_input) throw std::runtime_error("peer crashed");
    return oracle.Predict(z);
  });
  const CrbEvalResult r = RunLocalizationEval(flaky, vocab, b.instances, {1});
  EXPECT_EQ(r.skipped.size(), 1u);
  EXPECT_EQ(r.skipped[0], b.instances.front().id);
  EXPECT_FALSE(r.log.empty());
}

TEST(SelfRevisionTest, OracleGeneratesAndRepairs) {
  const Bench& b = FixtureBench();
  StubGrader g = CanonicalGrader(b.tasks);
  CorrectiveOracleDenoiser oracle = OracleFor(b);
  SelfRevisionConfig cfg;
  cfg.seed = 1;
  const CrbEvalResult r = RunSelfRevision(oracle, b.vocab, b.tasks, g, cfg);
  EXPECT_EQ(r.summary.at("generated").get<int>(), static_cast<int>(b.tasks.size()));
  EXPECT_EQ(r.summary.at("generated_pass").get<int>(), static_cast<int>(b.tasks.size()));
  for (int t : cfg.steps) {
    EXPECT_DOUBLE_EQ(r.report.Get({{"experiment", "self_revision"}, {"T", std::to_string(t)}},
                                  "pass_at_1"),
                     1.0);
  }
}

TEST(SelfRevisionTest, NoPassingGenerationGivesDiagnostic) {
  const Bench& b = FixtureBench();
  StubGrader g = CanonicalGrader(b.tasks);
  UniformDenoiser model(b.vocab.vocabulary());
  const CrbEvalResult r = RunSelfRevision(model, b.vocab, b.tasks, g, SelfRevisionConfig{});
  EXPECT_EQ(r.report.size(), 0u);
  EXPECT_FALSE(r.log.empty());
}

TEST(SelfRevisionTest, ValidateRejectsBadConfig) {
  SelfRevisionConfig cfg;
  cfg.steps = {};
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  cfg = SelfRevisionConfig{};
  cfg.tau = 1.5;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
}

}  // namespace
}  // namespace cdlm::crb
