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

// Code Revision Benchmark construction: type-preserving token substitution
// on Python programs, validated by execution.
//
// An instance is accepted only when the grader passes the original program
// and does not pass the corrupted one. Token streams of the original and the
// corrupted program have equal length and differ exactly on the error set.

#ifndef CDLM_CRB_CRBGEN_H_
#define CDLM_CRB_CRBGEN_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cdlm/crb/grading.h"
#include "cdlm/crb/lexer.h"
#include "cdlm/rng.h"
#include "cdlm/sequence.h"

namespace cdlm::crb {

struct SourceTask {
  std::string id;
  std::string source_dataset;
  std::string code;
  std::string tests;
  std::string entry_point;

  nlohmann::json ToJson() const;
  // `id` and `source_dataset` fall back to the given defaults when absent.
  static SourceTask FromJson(const nlohmann::json& j,
                             const std::string& default_id,
                             const std::string& default_dataset);
};

// Reads every *.json file in `dir` (sorted by file name). Each file holds
// {"code", "tests", "entry_point"} and optionally "id"; the id defaults to
// the file stem. Throws std::runtime_error on unreadable or malformed files.
std::vector<SourceTask> LoadCorpus(const std::string& dir,
                                   const std::string& dataset_tag);

// Type-preserving substitutes for tokens[index], sorted and duplicate-free:
//  * operator   -> the rest of the operator class
//  * identifier -> other identifiers of the same scope, module-level names,
//                  builtins used in the source and True/False when used
//  * decimal    -> one digit changed, no new leading zero
//  * boolean    -> the other boolean
// Each candidate lexes to a single token of the same category. Attribute
// names, "self", "cls" and tokens of category other get no candidates.
std::vector<std::string> CandidateReplacements(
    const std::vector<ClassifiedToken>& tokens, std::size_t index);

enum class CorruptionMode { kMixed, kSingleType };

std::string CorruptionModeName(CorruptionMode m);
CorruptionMode ParseCorruptionMode(const std::string& s);

struct CorruptionConfig {
  int n_replace = 1;
  std::set<TokenCategory> allowed_types = {TokenCategory::kOperator,
                                           TokenCategory::kIdentifier,
                                           TokenCategory::kLiteral};
  CorruptionMode mode = CorruptionMode::kMixed;
  // Redraws allowed when a substitution breaks token alignment.
  int alignment_attempts = 16;

  void Validate() const;
};

struct Replacement {
  int index = 0;
  std::string original;
  std::string replacement;
  TokenCategory category = TokenCategory::kOther;
  // "operator", "identifier", "identifier_boolean", "numeric" or "boolean".
  std::string substitution;
};

struct BenchmarkInstance {
  std::string id;
  std::string task_id;
  std::string source_dataset;
  std::string original_code;
  std::string corrupted_code;
  PositionSet error_set;
  std::vector<TokenCategory> error_types;  // aligned with error_set
  int n_replace = 0;
  std::string tests;
  std::string entry_point;
  std::vector<Replacement> replacements;
  CorruptionMode mode = CorruptionMode::kMixed;
  int token_count = 0;
  GradeStatus original_status = GradeStatus::kError;
  GradeStatus corrupted_status = GradeStatus::kError;
  double corrupted_wall_ms = 0.0;
  std::string corrupted_stderr_tail;

  // "mixed" when the error positions span several categories.
  std::string ErrorTypeLabel() const;

  nlohmann::json ToJson() const;
  static BenchmarkInstance FromJson(const nlohmann::json& j);
};

std::string InstancesToJsonl(const std::vector<BenchmarkInstance>& items);
std::vector<BenchmarkInstance> InstancesFromJsonl(const std::string& text);
std::vector<BenchmarkInstance> ReadInstances(const std::string& path);
void WriteInstances(const std::string& path,
                    const std::vector<BenchmarkInstance>& items);

struct CorruptionResult {
  std::optional<BenchmarkInstance> instance;
  std::string skip_reason;  // set when instance is empty
};

// Samples |E| = n_replace positions uniformly from those with candidates and
// substitutes one uniformly drawn candidate at each. Mixed mode pools every
// allowed category; single-type mode first draws one category among those
// with enough usable positions. Throws LexError when the source does not lex.
CorruptionResult CorruptProgram(const SourceTask& task,
                                const CorruptionConfig& cfg, Rng rng);

// Alignment and category-preservation problems of an instance; empty when
// the instance is well formed.
std::vector<std::string> CheckInstance(const BenchmarkInstance& inst);

enum class ValidationOutcome { kAccepted, kDiscarded, kSourceRejected };

std::string ValidationOutcomeName(ValidationOutcome o);

struct ValidationResult {
  ValidationOutcome outcome = ValidationOutcome::kDiscarded;
  BenchmarkInstance instance;  // verdict fields filled in
  GradeVerdict original;
  GradeVerdict corrupted;
};

// Grades original and corrupted code in one batch. GraderUnavailableError
// propagates.
ValidationResult ValidateAndEmit(const BenchmarkInstance& candidate,
                                 GradingInterface& grader,
                                 double timeout_s = 10.0);

struct RevalidationResult {
  bool consistent = false;  // structure ok and both verdicts as recorded
  std::vector<std::string> problems;
  GradeStatus original = GradeStatus::kError;
  GradeStatus corrupted = GradeStatus::kError;
};

RevalidationResult Revalidate(const BenchmarkInstance& inst,
                              GradingInterface& grader,
                              double timeout_s = 10.0);

struct GenerationConfig {
  std::vector<int> n_replace = {1, 2, 3, 4, 5};
  int samples_per_n = 1;
  // Fresh corruptions tried per (task, n, sample) while the grader keeps
  // passing them.
  int max_attempts = 8;
  std::set<TokenCategory> allowed_types = {TokenCategory::kOperator,
                                           TokenCategory::kIdentifier,
                                           TokenCategory::kLiteral};
  CorruptionMode mode = CorruptionMode::kMixed;
  double timeout_s = 10.0;
  std::uint64_t seed = 0;

  void Validate() const;
  nlohmann::json ToJson() const;
};

struct GenerationStats {
  int tasks = 0;
  int tasks_resumed = 0;
  int sources_rejected = 0;
  int accepted = 0;
  int discarded = 0;
  int skipped = 0;
  std::vector<std::string> log;

  nlohmann::json ToJson() const;
};

struct GenerationResult {
  std::vector<BenchmarkInstance> instances;  // sorted by id
  GenerationStats stats;
};

// Called once per finished task with that task's accepted instances.
using TaskDoneFn = std::function<void(
    const std::string& task_id, const std::vector<BenchmarkInstance>&)>;

// Randomness for task k (corpus order), replacement count n, sample s and
// attempt a comes from Rng(seed).Split(k).Split(n).Split(s).Split(a), so
// results do not depend on which tasks were resumed. Tasks in `done` are
// skipped. GraderUnavailableError propagates after the last finished task
// has been reported.
GenerationResult GenerateBenchmark(const std::vector<SourceTask>& tasks,
                                   const GenerationConfig& cfg,
                                   GradingInterface& grader,
                                   const std::set<std::string>& done = {},
                                   const TaskDoneFn& on_task_done = nullptr);

// Instance id: <task>/n<n>/s<sample, three digits>.
std::string InstanceId(const std::string& task_id, int n_replace, int sample);

}  // namespace cdlm::crb

#endif  // CDLM_CRB_CRBGEN_H_
