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
// Model-agnostic denoiser interface and confidence prediction.
//
// Anything that maps a token sequence to one probability distribution per
// position can drive refinement and evaluation: the in-process transformer,
// lookup-table stubs used in tests, or an out-of-process model speaking the
// stream bridge protocol (bridge.h).

#ifndef CDLM_DENOISER_H_
#define CDLM_DENOISER_H_

#include <memory>
#include <vector>

#include "cdlm/sequence.h"
#include "cdlm/transformer.h"

namespace cdlm {

// Row-major [positions x vocab] probabilities for one sequence.
struct Distribution {
  int positions = 0;
  int vocab = 0;
  std::vector<double> probs;

  double at(int i, Token v) const {
    return probs[static_cast<std::size_t>(i) * vocab + v];
  }
  const double* row(int i) const {
    return probs.data() + static_cast<std::size_t>(i) * vocab;
  }
};

class DenoiserInterface {
 public:
  virtual ~DenoiserInterface() = default;

  virtual const Vocabulary& vocab() const = 0;

  // One distribution per input. Implementations must be deterministic.
  virtual std::vector<Distribution> PredictBatch(
      const std::vector<TokenSequence>& inputs) = 0;

  Distribution Predict(const TokenSequence& z);
};

struct ConfidencePrediction {
  TokenSequence predictions;
  std::vector<double> confidences;
};

// Per-position argmax and its probability. With `exclude_mask` the mask
// symbol is removed from the argmax domain. Ties go to the lowest index.
ConfidencePrediction ConfidenceFromDistribution(const Distribution& d,
                                                const Vocabulary& vocab,
                                                bool exclude_mask);

ConfidencePrediction ConfidencePredict(DenoiserInterface& model,
                                       const TokenSequence& z,
                                       bool exclude_mask);

std::vector<ConfidencePrediction> ConfidencePredictBatch(
    DenoiserInterface& model, const std::vector<TokenSequence>& inputs,
    bool exclude_mask);

// Probability each position assigns to the token it currently holds.
std::vector<double> ObservedTokenProbabilities(const Distribution& d,
                                               const TokenSequence& z);

// Softmax of each row of a [rows x vocab] logit table, computed in double.
std::vector<double> SoftmaxRows(const float* logits, int rows, int vocab);

// Eval-mode transformer behind the denoiser interface; inputs are evaluated
// in chunks of at most `max_batch` sequences.
class TransformerDenoiser : public DenoiserInterface {
 public:
  TransformerDenoiser(std::shared_ptr<const Transformer<float>> model,
                      int max_batch = 64);

  const Vocabulary& vocab() const override { return model_->config().vocab; }
  std::vector<Distribution> PredictBatch(
      const std::vector<TokenSequence>& inputs) override;

  const Transformer<float>& model() const { return *model_; }

 private:
  std::shared_ptr<const Transformer<float>> model_;
  int max_batch_;
};

}  // namespace cdlm

#endif  // CDLM_DENOISER_H_
