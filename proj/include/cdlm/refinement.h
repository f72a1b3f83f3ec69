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
// Confidence-based iterative refinement over any DenoiserInterface.
//
//  * Refine: threshold remasking. Masked positions take the argmax over the
//    full vocabulary, visible positions keep their token, and every position
//    whose max-probability confidence is below tau is remasked.
//  * RefineEditable: only positions in the editable set may change. Argmax
//    and confidence exclude the mask symbol; editable positions below tau
//    are remasked, the rest take the argmax.
//  * DecodeCompletion: fill every mask, then remask the k_t least confident
//    generated positions, k_t = round_half_down(k0 * (1 - (t + 1) / T)).
//
// All three run a batch of sequences in lockstep with one model call per
// step, and record a replayable trace.

#ifndef CDLM_REFINEMENT_H_
#define CDLM_REFINEMENT_H_

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cdlm/denoiser.h"
#include "cdlm/sequence.h"

namespace cdlm {

enum class RefineVariant { kAlg1, kAlg2 };

struct RefinementConfig {
  double tau = 0.9;
  int steps = 1;
  RefineVariant variant = RefineVariant::kAlg1;
  std::optional<PositionSet> editable_set;
  // Ablation: take the argmax at visible positions too (Alg. 1 only).
  bool argmax_everywhere = false;

  // Throws std::invalid_argument for tau outside (0, 1), steps < 1, or a
  // missing editable set under kAlg2.
  void Validate() const;
};

struct RefinementStep {
  TokenSequence input;
  TokenSequence predictions;
  std::vector<double> confidences;
  PositionSet remask;
  TokenSequence output;
};

struct RefinementTrace {
  std::string algorithm;  // "alg1", "alg2" or "completion"
  std::vector<RefinementStep> steps;
  // Alg. 2 with an empty editable set.
  bool empty_editable = false;
  // Completion budget k0 was larger than the generated region.
  bool budget_clamped = false;

  // One JSON object per step.
  std::string ToJsonl() const;
  static RefinementTrace FromJsonl(const std::string& text,
                                   const Vocabulary& vocab);
};

struct RefinementResult {
  TokenSequence final;
  RefinementTrace trace;
};

RefinementResult Refine(DenoiserInterface& model, const TokenSequence& z0,
                        const RefinementConfig& cfg);
std::vector<RefinementResult> RefineBatch(DenoiserInterface& model,
                                          const std::vector<TokenSequence>& z0,
                                          const RefinementConfig& cfg);

// cfg.editable_set applies to RefineEditable; the batch form takes one
// editable set per sequence and ignores cfg.editable_set.
RefinementResult RefineEditable(DenoiserInterface& model,
                                const TokenSequence& z0,
                                const RefinementConfig& cfg);
std::vector<RefinementResult> RefineEditableBatch(
    DenoiserInterface& model, const std::vector<TokenSequence>& z0,
    const std::vector<PositionSet>& editable, const RefinementConfig& cfg);

enum class ConfidenceMode { kLive, kFrozen };

struct CompletionConfig {
  int steps = 1;
  int remask_budget = 0;  // k0
  ConfidenceMode confidence_mode = ConfidenceMode::kLive;

  void Validate() const;
};

// Remask count after step t (0-based) of T.
int RemaskCount(int k0, int t, int steps);

// Live mode ranks generated positions by the probability this step assigns
// to the token they hold after filling; frozen mode by the confidence each
// position received the first time it was unmasked. Prompt positions (those
// visible in the input) are never remasked.
RefinementResult DecodeCompletion(DenoiserInterface& model,
                                  const TokenSequence& prompt,
                                  const CompletionConfig& cfg);
std::vector<RefinementResult> DecodeCompletionBatch(
    DenoiserInterface& model, const std::vector<TokenSequence>& prompts,
    const CompletionConfig& cfg);

// One model call that replaces every remaining mask with the argmax over the
// non-mask symbols; visible positions are untouched.
std::vector<TokenSequence> FillMasksBatch(DenoiserInterface& model,
                                          const std::vector<TokenSequence>& z);

// k lowest entries of `scores` restricted to `candidates`, ties broken by
// lower position; returned sorted by position.
PositionSet LowestK(const std::vector<double>& scores,
                    const PositionSet& candidates, int k);

}  // namespace cdlm

#endif  // CDLM_REFINEMENT_H_
