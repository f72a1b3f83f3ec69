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

// Forward noising processes: absorbing-mask corruption and the two-stage
// absorbing + uniform-replacement mixture.

#ifndef CDLM_CORRUPTION_H_
#define CDLM_CORRUPTION_H_

#include <map>

#include "cdlm/rng.h"
#include "cdlm/sequence.h"

namespace cdlm {

// Uniform(lo, hi) law for the per-example mask ratio; lo == hi pins it.
struct MaskRatioLaw {
  double lo = 0.0;
  double hi = 1.0;

  double Sample(Rng& rng) const;
};

struct MixtureConfig {
  // Probability that a visible position is uniformly replaced.
  double alpha = 0.1;
  // Weight on the replaced-position loss term.
  double lambda_noise = 1.0;
  MaskRatioLaw mask_ratio_law;
  // Ablation switch: draw alpha ~ Uniform(0, alpha_max) per example.
  bool sample_alpha = false;
  double alpha_max = 0.2;

  // Throws std::invalid_argument on out-of-range fields.
  void Validate() const;
};

struct CorruptionOutcome {
  TokenSequence corrupted;
  PositionSet masked_set;    // M
  PositionSet replaced_set;  // N
  double mask_ratio_used = 0.0;
  std::map<int, Token> originals;  // clean token for every i in M and N

  // Throws std::logic_error if the outcome is not a valid corruption of
  // `clean`: M and N disjoint and sorted, masks exactly on M, replaced tokens
  // differ from the original and from the mask, all else untouched.
  void CheckInvariants(const TokenSequence& clean) const;
};

// Stream ids used by MixtureCorrupt, shared with the training loop so the
// absorbing-only and mixture objectives consume identical randomness.
inline constexpr std::uint64_t kRatioStream = 1;
inline constexpr std::uint64_t kMaskStream = 2;
inline constexpr std::uint64_t kReplaceStream = 3;
inline constexpr std::uint64_t kAlphaStream = 4;

// Masks each position independently with probability `lambda`. Rejects
// clean sequences that already contain the mask symbol.
CorruptionOutcome AbsorbCorrupt(const TokenSequence& x, double lambda, Rng rng);

// Replaces each visible (non-masked) position with probability `alpha` by a
// symbol drawn uniformly from V \ {mask, original}. Requires an outcome with
// an empty replaced set and a vocabulary of at least 3 symbols.
CorruptionOutcome UniformReplace(const CorruptionOutcome& partial, double alpha,
                                 Rng rng);

// Stage 1 (AbsorbCorrupt at r_mask ~ cfg.mask_ratio_law, redrawn until at
// least one position is masked) followed by Stage 2 (UniformReplace). The
// stages draw from independent child streams of `rng`.
CorruptionOutcome MixtureCorrupt(const TokenSequence& x, const MixtureConfig& cfg,
                                 const Rng& rng);

// Stage 1 alone with the same redraw rule and streams as MixtureCorrupt.
CorruptionOutcome AbsorbWithSampledRatio(const TokenSequence& x,
                                         const MaskRatioLaw& law,
                                         const Rng& rng);

}  // namespace cdlm

#endif  // CDLM_CORRUPTION_H_
