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

// Model-facing evaluation on code revision instances.
//
// Programs are presented to a denoiser as sequences of lexer tokens over a
// code vocabulary (0 = mask, 1 = unknown, then token texts). Whitespace and
// comments are not tokens; predicted sequences are turned back into source
// by writing token texts into the original spans.

#ifndef CDLM_CRB_EVALUATION_H_
#define CDLM_CRB_EVALUATION_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cdlm/crb/crbgen.h"
#include "cdlm/crb/grading.h"
#include "cdlm/crb/lexer.h"
#include "cdlm/denoiser.h"
#include "cdlm/metrics.h"
#include "cdlm/refinement.h"

namespace cdlm::crb {

class CodeVocab {
 public:
  static constexpr Token kMaskId = 0;
  static constexpr Token kUnknownId = 1;

  CodeVocab() : CodeVocab(std::vector<std::string>{}) {}
  // Sorted, duplicates removed; the special texts may not appear.
  explicit CodeVocab(std::vector<std::string> texts);

  // Every token of the original and corrupted programs.
  static CodeVocab FromInstances(const std::vector<BenchmarkInstance>& items);
  // Every token of the tasks plus every candidate replacement, so the
  // vocabulary is closed under corruption.
  static CodeVocab FromTasks(const std::vector<SourceTask>& tasks);

  Vocabulary vocabulary() const;
  int size() const { return static_cast<int>(texts_.size()); }
  Token Id(const std::string& text) const;
  const std::string& Text(Token id) const;

  TokenSequence Encode(const std::vector<ClassifiedToken>& tokens) const;
  // `source` with token i replaced by Text(z[i]); z.size() == layout.size().
  std::string Decode(std::string_view source,
                     const std::vector<ClassifiedToken>& layout,
                     const TokenSequence& z) const;

  nlohmann::json ToJson() const;
  static CodeVocab FromJson(const nlohmann::json& j);

 private:
  std::vector<std::string> texts_;
  std::map<std::string, Token> ids_;
};

// Token positions of the entry point's body (after the signature colon).
PositionSet BodyPositions(const std::vector<ClassifiedToken>& tokens,
                          const std::string& entry_point);

struct CrbEvalResult {
  Report report = CrbReport();
  std::vector<std::string> skipped;  // ids the model bridge failed on
  std::vector<std::string> log;
  nlohmann::json summary = nlohmann::json::object();
};

// One forward pass per instance on the corrupted program. Confidence of a
// position is the probability the model gives the token it holds; the
// max-probability variant is reported with the suffix "_maxprob". Rows are
// grouped by n_replace and error type ("all" plus the instance's label).
CrbEvalResult RunLocalizationEval(DenoiserInterface& model,
                                  const CodeVocab& vocab,
                                  const std::vector<BenchmarkInstance>& items,
                                  const std::vector<int>& ks);

// Threshold refinement run to max(T); the state after each requested T is
// completed by one mask-filling call and graded. Pass@1 per (n_replace, T).
CrbEvalResult RunRefinementEval(DenoiserInterface& model,
                                const CodeVocab& vocab,
                                const std::vector<BenchmarkInstance>& items,
                                double tau, const std::vector<int>& steps,
                                GradingInterface& grader,
                                double timeout_s = 10.0);

struct SelfRevisionConfig {
  CompletionConfig generation{4, 0, ConfidenceMode::kLive};
  double tau = 0.9;
  std::vector<int> steps = {1, 2, 3, 4};
  int max_attempts = 8;
  double timeout_s = 10.0;
  std::uint64_t seed = 0;

  void Validate() const;
  nlohmann::json ToJson() const;
};

// Generates each entry-point body from a fully masked body, keeps programs
// that pass, corrupts one token (validated to fail), refines and grades.
// No passing generation yields an empty report and a diagnostic in `log`.
CrbEvalResult RunSelfRevision(DenoiserInterface& model, const CodeVocab& vocab,
                              const std::vector<SourceTask>& prompts,
                              GradingInterface& grader,
                              const SelfRevisionConfig& cfg);

}  // namespace cdlm::crb

#endif  // CDLM_CRB_EVALUATION_H_
