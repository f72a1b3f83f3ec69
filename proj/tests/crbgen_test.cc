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

#include "cdlm/crb/crbgen.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "gtest/gtest.h"

namespace cdlm::crb {
namespace {

namespace fs = std::filesystem;

const std::string kCorpusDir = std::string(CDLM_FIXTURE_DIR) + "/crb_corpus";

std::size_t IndexOf(const std::vector<ClassifiedToken>& t, const std::string& text,
                    int occurrence = 0) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].text == text && occurrence-- == 0) return i;
  }
  ADD_FAILURE() << "token " << text << " not found";
  return 0;
}

std::vector<std::string> Cands(const std::string& src, const std::string& text,
                               int occurrence = 0) {
  const auto t = TokenizeClassify(src);
  return CandidateReplacements(t, IndexOf(t, text, occurrence));
}

SourceTask Task(const std::string& id, const std::string& code) {
  return {id, "unit", code, "def check(candidate):\n    pass\n", "f"};
}

StubGrader CanonicalGrader(const std::vector<SourceTask>& tasks) {
  StubGrader g;
  for (const auto& t : tasks) g.AddCanonical(t.code, t.tests, t.entry_point);
  return g;
}

TEST(CandidatesTest, OperatorGetsTheOtherTen) {
  const auto c = Cands("a + b", "+");
  EXPECT_EQ(c.size(), 10u);
  EXPECT_TRUE(std::is_sorted(c.begin(), c.end()));
  EXPECT_EQ(std::count(c.begin(), c.end(), "+"), 0);
  for (const char* op : {"-", "*", "/", "%", "<", ">", "<=", ">=", "==", "!="}) {
    EXPECT_EQ(std::count(c.begin(), c.end(), op), 1) << op;
  }
}

TEST(CandidatesTest, SoleIdentifierHasNoSubstitute) {
  EXPECT_TRUE(Cands("x\n", "x").empty());
}

TEST(CandidatesTest, DecimalSingleDigitChanges) {
  EXPECT_EQ(Cands("x = 0\n", "0"),
            (std::vector<std::string>{"1", "2", "3", "4", "5", "6", "7", "8", "9"}));
  const auto ten = Cands("x = 10\n", "10");
  EXPECT_EQ(ten.size(), 17u);
  EXPECT_EQ(std::count(ten.begin(), ten.end(), "00"), 0);
  EXPECT_EQ(std::count(ten.begin(), ten.end(), "90"), 1);
  EXPECT_EQ(std::count(ten.begin(), ten.end(), "19"), 1);
  const auto frac = Cands("x = 3.5\n", "3.5");
  EXPECT_EQ(frac.size(), 18u);
  EXPECT_EQ(std::count(frac.begin(), frac.end(), "0.5"), 1);
  EXPECT_EQ(std::count(frac.begin(), frac.end(), "3.0"), 1);
}

TEST(CandidatesTest, BooleansSwap) {
  EXPECT_EQ(Cands("x = True\n", "True"), (std::vector<std::string>{"False"}));
  EXPECT_EQ(Cands("x = False\n", "False"), (std::vector<std::string>{"True"}));
}

TEST(CandidatesTest, IdentifiersDrawFromScope) {
  const std::string src =
      "LIMIT = 3\n"
      "def f(a, b):\n"
      "    c = len(a)\n"
      "    return a + b\n"
      "def g(z):\n"
      "    return z\n";
  const auto c = Cands(src, "a", 2);
  EXPECT_EQ(std::count(c.begin(), c.end(), "a"), 0);
  for (const char* want : {"b", "c", "LIMIT", "len", "f", "g"}) {
    EXPECT_EQ(std::count(c.begin(), c.end(), want), 1) << want;
  }
  EXPECT_EQ(std::count(c.begin(), c.end(), "z"), 0);
}

TEST(CandidatesTest, AttributesSelfAndOtherGetNothing) {
  const std::string src =
      "class K:\n"
      "    def m(self, x):\n"
      "        return self.value + x.real\n";
  EXPECT_TRUE(Cands(src, "self", 1).empty());
  EXPECT_TRUE(Cands(src, "value").empty());
  EXPECT_TRUE(Cands(src, "real").empty());
  EXPECT_TRUE(Cands(src, "return").empty());
  EXPECT_TRUE(Cands(src, "(").empty());
}

TEST(CandidatesTest, BooleanUsedInSourceJoinsIdentifierPool) {
  const std::string src = "def f(a, b):\n    ok = True\n    return a\n";
  const auto c = Cands(src, "a", 1);
  EXPECT_EQ(std::count(c.begin(), c.end(), "True"), 1);
  EXPECT_EQ(std::count(c.begin(), c.end(), "False"), 0);
}

TEST(CorruptProgramTest, ProducesAlignedTypePreservingInstance) {
  const SourceTask task = Task("t", "def f(a, b):\n    if a < b:\n        return a * 2\n    return b - 1\n");
  for (int n = 1; n <= 4; ++n) {
    CorruptionConfig cfg;
    cfg.n_replace = n;
    for (int s = 0; s < 20; ++s) {
      const CorruptionResult r = CorruptProgram(task, cfg, Rng(3).Split(s));
      ASSERT_TRUE(r.instance.has_value()) << r.skip_reason;
      const BenchmarkInstance& inst = *r.instance;
      EXPECT_TRUE(CheckInstance(inst).empty());
      ASSERT_EQ(static_cast<int>(inst.error_set.size()), n);
      const auto a = TokenizeClassify(inst.original_code);
      const auto b = TokenizeClassify(inst.corrupted_code);
      ASSERT_EQ(a.size(), b.size());
      ASSERT_EQ(inst.token_count, static_cast<int>(a.size()));
      for (std::size_t i = 0; i < a.size(); ++i) {
        const bool in_e = Contains(inst.error_set, static_cast<int>(i));
        EXPECT_EQ(a[i].text != b[i].text, in_e) << i;
        if (in_e) EXPECT_EQ(a[i].category, b[i].category);
      }
    }
  }
}

TEST(CorruptProgramTest, SkipsWhenTooFewPositions) {
  CorruptionConfig cfg;
  cfg.n_replace = 5;
  cfg.allowed_types = {TokenCategory::kOperator};
  const CorruptionResult r = CorruptProgram(Task("t", "def f(a):\n    return a + 1\n"), cfg, Rng(1));
  EXPECT_FALSE(r.instance.has_value());
  EXPECT_FALSE(r.skip_reason.empty());
}

TEST(CorruptProgramTest, SingleTypeModeUsesOneCategory) {
  const SourceTask task =
      Task("t", "def f(a, b):\n    if a < b:\n        return a * 2\n    return b - 1\n");
  CorruptionConfig cfg;
  cfg.n_replace = 2;
  cfg.mode = CorruptionMode::kSingleType;
  for (int s = 0; s < 30; ++s) {
    const CorruptionResult r = CorruptProgram(task, cfg, Rng(5).Split(s));
    ASSERT_TRUE(r.instance.has_value());
    const auto& types = r.instance->error_types;
    EXPECT_TRUE(std::all_of(types.begin(), types.end(),
                            [&](TokenCategory c) { return c == types[0]; }));
    EXPECT_NE(r.instance->ErrorTypeLabel(), "mixed");
  }
}

TEST(CorruptProgramTest, DeterministicGivenStream) {
  const SourceTask task = Task("t", "def f(a, b):\n    return a + b * 3\n");
  CorruptionConfig cfg;
  cfg.n_replace = 2;
  const auto a = CorruptProgram(task, cfg, Rng(9));
  const auto b = CorruptProgram(task, cfg, Rng(9));
  ASSERT_TRUE(a.instance && b.instance);
  EXPECT_EQ(a.instance->ToJson(), b.instance->ToJson());
}

TEST(CorruptProgramTest, UnlexableSourceThrows) {
  CorruptionConfig cfg;
  EXPECT_THROW(CorruptProgram(Task("t", "def f(:\n"), cfg, Rng(1)), LexError);
}

TEST(CheckInstanceTest, FlagsMisalignment) {
  const SourceTask task = Task("t", "def f(a, b):\n    return a + b\n");
  CorruptionConfig cfg;
  auto inst = *CorruptProgram(task, cfg, Rng(2)).instance;
  ASSERT_TRUE(CheckInstance(inst).empty());
  BenchmarkInstance bad = inst;
  bad.corrupted_code = bad.original_code;
  EXPECT_FALSE(CheckInstance(bad).empty());
  bad = inst;
  bad.corrupted_code += "x = 1\n";
  EXPECT_FALSE(CheckInstance(bad).empty());
  bad = inst;
  bad.error_set = {0};
  EXPECT_FALSE(CheckInstance(bad).empty());
}

TEST(ValidateTest, AcceptDiscardAndReject) {
  const SourceTask task = Task("t", "def f(a, b):\n    return a + b\n");
  CorruptionConfig cfg;
  const BenchmarkInstance cand = *CorruptProgram(task, cfg, Rng(4)).instance;

  StubGrader canonical = CanonicalGrader({task});
  const ValidationResult ok = ValidateAndEmit(cand, canonical);
  EXPECT_EQ(ok.outcome, ValidationOutcome::kAccepted);
  EXPECT_EQ(ok.instance.original_status, GradeStatus::kPass);
  EXPECT_EQ(ok.instance.corrupted_status, GradeStatus::kFail);

  StubGrader lenient([](const GradeRequest&) { return GradeStatus::kPass; });
  EXPECT_EQ(ValidateAndEmit(cand, lenient).outcome, ValidationOutcome::kDiscarded);

  StubGrader harsh([](const GradeRequest&) { return GradeStatus::kFail; });
  EXPECT_EQ(ValidateAndEmit(cand, harsh).outcome, ValidationOutcome::kSourceRejected);

  StubGrader timeouts([&](const GradeRequest& r) {
    return r.code == task.code ? GradeStatus::kPass : GradeStatus::kTimeout;
  });
  const ValidationResult t = ValidateAndEmit(cand, timeouts);
  EXPECT_EQ(t.outcome, ValidationOutcome::kAccepted);
  EXPECT_EQ(t.instance.corrupted_status, GradeStatus::kTimeout);
}

TEST(ValidateTest, RevalidationIsIdempotentThroughJson) {
  const SourceTask task = Task("t", "def f(a, b):\n    return a * b - 1\n");
  StubGrader g = CanonicalGrader({task});
  CorruptionConfig cfg;
  cfg.n_replace = 2;
  const BenchmarkInstance cand = *CorruptProgram(task, cfg, Rng(6)).instance;
  const ValidationResult v = ValidateAndEmit(cand, g);
  ASSERT_EQ(v.outcome, ValidationOutcome::kAccepted);
  const BenchmarkInstance back =
      InstancesFromJsonl(InstancesToJsonl({v.instance})).at(0);
  EXPECT_EQ(back.ToJson(), v.instance.ToJson());
  for (int round = 0; round < 3; ++round) {
    const RevalidationResult r = Revalidate(back, g);
    EXPECT_TRUE(r.consistent);
    EXPECT_TRUE(r.problems.empty());
  }
  StubGrader lenient([](const GradeRequest&) { return GradeStatus::kPass; });
  EXPECT_FALSE(Revalidate(back, lenient).consistent);
}

TEST(CorpusTest, LoadsFixtureCorpus) {
  const auto tasks = LoadCorpus(kCorpusDir, "fixture");
  EXPECT_EQ(tasks.size(), 24u);
  EXPECT_TRUE(std::is_sorted(tasks.begin(), tasks.end(),
                             [](const SourceTask& a, const SourceTask& b) { return a.id < b.id; }));
  for (const auto& t : tasks) {
    EXPECT_EQ(t.source_dataset, "fixture");
    EXPECT_FALSE(t.entry_point.empty());
    EXPECT_NO_THROW(TokenizeClassify(t.code)) << t.id;
  }
}

TEST(CorpusTest, RejectsDuplicateIdsAndMalformedFiles) {
  const fs::path dir = fs::temp_directory_path() / "cdlm_corpus_dup";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string body = R"({"id": "same", "code": "x = 1\n", "tests": "", "entry_point": "x"})";
  std::ofstream(dir / "a.json") << body;
  std::ofstream(dir / "b.json") << body;
  EXPECT_THROW(LoadCorpus(dir.string(), "d"), std::runtime_error);
  fs::remove(dir / "b.json");
  std::ofstream(dir / "c.json") << "{not json";
  EXPECT_THROW(LoadCorpus(dir.string(), "d"), std::runtime_error);
}

TEST(GenerateTest, FixtureCorpusIsDeterministicAndResumable) {
  const auto tasks = LoadCorpus(kCorpusDir, "fixture");
  GenerationConfig cfg;
  cfg.seed = 3;
  StubGrader g1 = CanonicalGrader(tasks);
  const GenerationResult full = GenerateBenchmark(tasks, cfg, g1);
  EXPECT_GT(full.stats.accepted, 100);
  EXPECT_EQ(full.stats.sources_rejected, 0);
  EXPECT_TRUE(std::is_sorted(full.instances.begin(), full.instances.end(),
                             [](const auto& a, const auto& b) { return a.id < b.id; }));
  for (const auto& inst : full.instances) {
    EXPECT_TRUE(CheckInstance(inst).empty()) << inst.id;
    EXPECT_EQ(inst.original_status, GradeStatus::kPass);
    EXPECT_NE(inst.corrupted_status, GradeStatus::kPass);
    EXPECT_EQ(inst.id, InstanceId(inst.task_id, inst.n_replace, 0));
  }

  StubGrader g2 = CanonicalGrader(tasks);
  EXPECT_EQ(InstancesToJsonl(GenerateBenchmark(tasks, cfg, g2).instances),
            InstancesToJsonl(full.instances));

  std::set<std::string> done;
  for (std::size_t k = 0; k < tasks.size() / 2; ++k) done.insert(tasks[k].id);
  StubGrader g3 = CanonicalGrader(tasks);
  std::vector<std::string> reported;
  const GenerationResult rest = GenerateBenchmark(
      tasks, cfg, g3, done,
      [&](const std::string& id, const std::vector<BenchmarkInstance>&) {
        reported.push_back(id);
      });
  EXPECT_EQ(rest.stats.tasks_resumed, static_cast<int>(done.size()));
  EXPECT_EQ(reported.size(), tasks.size() - done.size());
  for (const auto& inst : rest.instances) {
    EXPECT_EQ(done.count(inst.task_id), 0u);
    const auto it = std::find_if(full.instances.begin(), full.instances.end(),
                                 [&](const auto& x) { return x.id == inst.id; });
    ASSERT_NE(it, full.instances.end());
    EXPECT_EQ(it->ToJson(), inst.ToJson());
  }
}

TEST(GenerateTest, LenientGraderDiscardsEverything) {
  const auto tasks = LoadCorpus(kCorpusDir, "fixture");
  GenerationConfig cfg;
  cfg.n_replace = {1};
  cfg.max_attempts = 2;
  StubGrader lenient([](const GradeRequest&) { return GradeStatus::kPass; });
  const GenerationResult r = GenerateBenchmark(tasks, cfg, lenient);
  EXPECT_TRUE(r.instances.empty());
  EXPECT_EQ(r.stats.accepted, 0);
  EXPECT_GT(r.stats.discarded, 0);
}

TEST(GenerateTest, UnavailableGraderPropagates) {
  const auto tasks = LoadCorpus(kCorpusDir, "fixture");
  StubGrader down([](const GradeRequest&) -> GradeStatus {
    throw GraderUnavailableError("offline");
  });
  EXPECT_THROW(GenerateBenchmark(tasks, GenerationConfig{}, down), GraderUnavailableError);
}

TEST(InstanceTest, IdAndLabels) {
  EXPECT_EQ(InstanceId("gcd", 3, 7), "gcd/n3/s007");
  BenchmarkInstance inst;
  inst.error_types = {TokenCategory::kOperator, TokenCategory::kOperator};
  EXPECT_EQ(inst.ErrorTypeLabel(), "operator");
  inst.error_types.push_back(TokenCategory::kLiteral);
  EXPECT_EQ(inst.ErrorTypeLabel(), "mixed");
  EXPECT_EQ(ParseCorruptionMode(CorruptionModeName(CorruptionMode::kSingleType)),
            CorruptionMode::kSingleType);
  CorruptionConfig bad;
  bad.n_replace = 0;
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
}

}  // namespace
}  // namespace cdlm::crb
