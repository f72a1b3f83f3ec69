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
// Deterministic denoisers for tests, fixtures and dry runs.

#ifndef CDLM_STUB_MODELS_H_
#define CDLM_STUB_MODELS_H_

#include <functional>
#include <map>
#include <vector>

#include "cdlm/denoiser.h"

namespace cdlm {

// Distribution chosen by an arbitrary function of the whole input.
class FunctionDenoiser : public DenoiserInterface {
 public:
  using Fn = std::function<Distribution(const TokenSequence&)>;
  FunctionDenoiser(Vocabulary vocab, Fn fn);

  const Vocabulary& vocab() const override { return vocab_; }
  std::vector<Distribution> PredictBatch(
      const std::vector<TokenSequence>& inputs) override;

 private:
  Vocabulary vocab_;
  Fn fn_;
};

// Exact lookup from full input sequence to distribution. Inputs missing from
// the table throw std::out_of_range.
class LookupTableDenoiser : public DenoiserInterface {
 public:
  explicit LookupTableDenoiser(Vocabulary vocab);

  void Add(const std::vector<Token>& input, Distribution d);
  std::size_t size() const { return table_.size(); }
  const std::map<std::vector<Token>, Distribution>& table() const {
    return table_;
  }

  const Vocabulary& vocab() const override { return vocab_; }
  std::vector<Distribution> PredictBatch(
      const std::vector<TokenSequence>& inputs) override;

 private:
  Vocabulary vocab_;
  std::map<std::vector<Token>, Distribution> table_;
};

// Probability 1 on targets[i] at every position. With a table of several
// targets, the target is the one agreeing with the input on the most visible
// positions (first wins ties).
class OracleDenoiser : public DenoiserInterface {
 public:
  OracleDenoiser(Vocabulary vocab, std::vector<TokenSequence> targets);

  const Vocabulary& vocab() const override { return vocab_; }
  std::vector<Distribution> PredictBatch(
      const std::vector<TokenSequence>& inputs) override;

  const TokenSequence& Match(const TokenSequence& z) const;

 private:
  Vocabulary vocab_;
  std::vector<TokenSequence> targets_;
};

// Error-aware oracle: probability 1 on the target at masked positions and at
// visible positions that agree with it; uniform over the non-mask symbols at
// visible positions that disagree. The target is chosen as in
// OracleDenoiser.
class CorrectiveOracleDenoiser : public DenoiserInterface {
 public:
  CorrectiveOracleDenoiser(Vocabulary vocab, std::vector<TokenSequence> targets);

  const Vocabulary& vocab() const override { return oracle_.vocab(); }
  std::vector<Distribution> PredictBatch(
      const std::vector<TokenSequence>& inputs) override;

 private:
  OracleDenoiser oracle_;
};

// Echoes visible tokens with probability 1; masked positions are uniform over
// the non-mask symbols.
class IdentityDenoiser : public DenoiserInterface {
 public:
  explicit IdentityDenoiser(Vocabulary vocab) : vocab_(vocab) {}
  const Vocabulary& vocab() const override { return vocab_; }
  std::vector<Distribution> PredictBatch(
      const std::vector<TokenSequence>& inputs) override;

 private:
  Vocabulary vocab_;
};

// Uniform over the full vocabulary everywhere.
class UniformDenoiser : public DenoiserInterface {
 public:
  explicit UniformDenoiser(Vocabulary vocab) : vocab_(vocab) {}
  const Vocabulary& vocab() const override { return vocab_; }
  std::vector<Distribution> PredictBatch(
      const std::vector<TokenSequence>& inputs) override;

 private:
  Vocabulary vocab_;
};

// One-hot distribution on `token` at each position.
Distribution OneHot(const std::vector<Token>& tokens, int vocab);

}  // namespace cdlm

#endif  // CDLM_STUB_MODELS_H_
