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
#include "cdlm/stub_models.h"

#include <stdexcept>

namespace cdlm {

Distribution OneHot(const std::vector<Token>& tokens, int vocab) {
  Distribution d{static_cast<int>(tokens.size()), vocab,
                 std::vector<double>(tokens.size() * static_cast<std::size_t>(vocab), 0.0)};
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    d.probs[i * static_cast<std::size_t>(vocab) + static_cast<std::size_t>(tokens[i])] = 1.0;
  }
  return d;
}

FunctionDenoiser::FunctionDenoiser(Vocabulary vocab, Fn fn)
    : vocab_(vocab), fn_(std::move(fn)) {}

std::vector<Distribution> FunctionDenoiser::PredictBatch(
    const std::vector<TokenSequence>& inputs) {
  std::vector<Distribution> out;
  out.reserve(inputs.size());
  for (const TokenSequence& z : inputs) out.push_back(fn_(z));
  return out;
}

LookupTableDenoiser::LookupTableDenoiser(Vocabulary vocab) : vocab_(vocab) {}

void LookupTableDenoiser::Add(const std::vector<Token>& input, Distribution d) {
  if (d.vocab != vocab_.size() ||
      d.positions != static_cast<int>(input.size()) ||
      d.probs.size() != input.size() * static_cast<std::size_t>(d.vocab)) {
    throw std::invalid_argument("table entry shape does not match its key");
  }
  table_[input] = std::move(d);
}

std::vector<Distribution> LookupTableDenoiser::PredictBatch(
    const std::vector<TokenSequence>& inputs) {
  std::vector<Distribution> out;
  out.reserve(inputs.size());
  for (const TokenSequence& z : inputs) {
    auto it = table_.find(z.tokens());
    if (it == table_.end()) throw std::out_of_range("input not in lookup table");
    out.push_back(it->second);
  }
  return out;
}

OracleDenoiser::OracleDenoiser(Vocabulary vocab,
                               std::vector<TokenSequence> targets)
    : vocab_(vocab), targets_(std::move(targets)) {
  if (targets_.empty()) throw std::invalid_argument("oracle needs a target");
}

const TokenSequence& OracleDenoiser::Match(const TokenSequence& z) const {
  const TokenSequence* best = nullptr;
  int best_score = -1;
  for (const TokenSequence& t : targets_) {
    if (t.size() != z.size()) continue;
    int score = 0;
    for (int i = 0; i < z.size(); ++i) {
      if (z[i] != vocab_.mask_id() && z[i] == t[i]) ++score;
    }
    if (score > best_score) {
      best_score = score;
      best = &t;
    }
  }
  if (best == nullptr) throw std::invalid_argument("no oracle target of this length");
  return *best;
}

std::vector<Distribution> OracleDenoiser::PredictBatch(
    const std::vector<TokenSequence>& inputs) {
  std::vector<Distribution> out;
  out.reserve(inputs.size());
  for (const TokenSequence& z : inputs) {
    out.push_back(OneHot(Match(z).tokens(), vocab_.size()));
  }
  return out;
}

CorrectiveOracleDenoiser::CorrectiveOracleDenoiser(
    Vocabulary vocab, std::vector<TokenSequence> targets)
    : oracle_(vocab, std::move(targets)) {}

std::vector<Distribution> CorrectiveOracleDenoiser::PredictBatch(
    const std::vector<TokenSequence>& inputs) {
  const Vocabulary& vocab = oracle_.vocab();
  const int v = vocab.size();
  std::vector<Distribution> out;
  out.reserve(inputs.size());
  for (const TokenSequence& z : inputs) {
    const TokenSequence& target = oracle_.Match(z);
    Distribution d = OneHot(target.tokens(), v);
    for (int i = 0; i < z.size(); ++i) {
      if (z.IsMasked(i) || z[i] == target[i]) continue;
      for (Token t = 0; t < v; ++t) {
        d.probs[static_cast<std::size_t>(i) * v + t] =
            t == vocab.mask_id() ? 0.0 : 1.0 / (v - 1);
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Distribution> IdentityDenoiser::PredictBatch(
    const std::vector<TokenSequence>& inputs) {
  std::vector<Distribution> out;
  out.reserve(inputs.size());
  const int v = vocab_.size();
  for (const TokenSequence& z : inputs) {
    Distribution d = OneHot(z.tokens(), v);
    for (int i = 0; i < z.size(); ++i) {
      if (!z.IsMasked(i)) continue;
      for (Token k = 0; k < v; ++k) {
        d.probs[static_cast<std::size_t>(i) * v + k] =
            k == vocab_.mask_id() ? 0.0 : 1.0 / (v - 1);
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Distribution> UniformDenoiser::PredictBatch(
    const std::vector<TokenSequence>& inputs) {
  std::vector<Distribution> out;
  out.reserve(inputs.size());
  const int v = vocab_.size();
  for (const TokenSequence& z : inputs) {
    out.push_back({z.size(), v,
                   std::vector<double>(static_cast<std::size_t>(z.size()) * v, 1.0 / v)});
  }
  return out;
}

}  // namespace cdlm
