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
#include "cdlm/denoiser.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cdlm {

Distribution DenoiserInterface::Predict(const TokenSequence& z) {
  std::vector<Distribution> out = PredictBatch({z});
  if (out.size() != 1) {
    throw std::runtime_error("denoiser returned the wrong number of outputs");
  }
  return std::move(out[0]);
}

ConfidencePrediction ConfidenceFromDistribution(const Distribution& d,
                                                const Vocabulary& vocab,
                                                bool exclude_mask) {
  if (d.vocab != vocab.size()) {
    throw std::invalid_argument("distribution width does not match vocabulary");
  }
  std::vector<Token> pred(static_cast<std::size_t>(d.positions));
  std::vector<double> conf(static_cast<std::size_t>(d.positions));
  for (int i = 0; i < d.positions; ++i) {
    const double* row = d.row(i);
    Token best = -1;
    double best_p = 0.0;
    for (Token v = 0; v < d.vocab; ++v) {
      if (exclude_mask && v == vocab.mask_id()) continue;
      if (best < 0 || row[v] > best_p) {
        best = v;
        best_p = row[v];
      }
    }
    pred[static_cast<std::size_t>(i)] = best;
    conf[static_cast<std::size_t>(i)] = best_p;
  }
  return {TokenSequence(std::move(pred), vocab), std::move(conf)};
}

ConfidencePrediction ConfidencePredict(DenoiserInterface& model,
                                       const TokenSequence& z,
                                       bool exclude_mask) {
  return ConfidenceFromDistribution(model.Predict(z), model.vocab(),
                                    exclude_mask);
}

std::vector<ConfidencePrediction> ConfidencePredictBatch(
    DenoiserInterface& model, const std::vector<TokenSequence>& inputs,
    bool exclude_mask) {
  std::vector<Distribution> dists = model.PredictBatch(inputs);
  if (dists.size() != inputs.size()) {
    throw std::runtime_error("denoiser returned the wrong number of outputs");
  }
  std::vector<ConfidencePrediction> out;
  out.reserve(dists.size());
  for (const Distribution& d : dists) {
    out.push_back(ConfidenceFromDistribution(d, model.vocab(), exclude_mask));
  }
  return out;
}

std::vector<double> ObservedTokenProbabilities(const Distribution& d,
                                               const TokenSequence& z) {
  if (z.size() != d.positions) {
    throw std::invalid_argument("sequence length does not match distribution");
  }
  std::vector<double> out(static_cast<std::size_t>(d.positions));
  for (int i = 0; i < d.positions; ++i) out[static_cast<std::size_t>(i)] = d.at(i, z[i]);
  return out;
}

std::vector<double> SoftmaxRows(const float* logits, int rows, int vocab) {
  std::vector<double> out(static_cast<std::size_t>(rows) * vocab);
  for (int r = 0; r < rows; ++r) {
    const float* x = logits + static_cast<std::size_t>(r) * vocab;
    double* y = out.data() + static_cast<std::size_t>(r) * vocab;
    const double mx = *std::max_element(x, x + vocab);
    double sum = 0.0;
    for (int v = 0; v < vocab; ++v) {
      y[v] = std::exp(static_cast<double>(x[v]) - mx);
      sum += y[v];
    }
    for (int v = 0; v < vocab; ++v) y[v] /= sum;
  }
  return out;
}

TransformerDenoiser::TransformerDenoiser(
    std::shared_ptr<const Transformer<float>> model, int max_batch)
    : model_(std::move(model)), max_batch_(max_batch) {
  if (!model_) throw std::invalid_argument("null model");
  if (max_batch_ < 1) throw std::invalid_argument("max_batch must be >= 1");
}

std::vector<Distribution> TransformerDenoiser::PredictBatch(
    const std::vector<TokenSequence>& inputs) {
  const ModelConfig& cfg = model_->config();
  const int seq = cfg.seq_len;
  const int vocab = cfg.vocab.size();
  std::vector<Distribution> out;
  out.reserve(inputs.size());
  ForwardCache<float> cache;
  std::vector<Token> tokens;
  for (std::size_t start = 0; start < inputs.size();
       start += static_cast<std::size_t>(max_batch_)) {
    const std::size_t end =
        std::min(inputs.size(), start + static_cast<std::size_t>(max_batch_));
    tokens.clear();
    for (std::size_t i = start; i < end; ++i) {
      if (inputs[i].size() != seq) {
        throw std::invalid_argument("input length " +
                                    std::to_string(inputs[i].size()) +
                                    " does not match seq_len " +
                                    std::to_string(seq));
      }
      tokens.insert(tokens.end(), inputs[i].tokens().begin(),
                    inputs[i].tokens().end());
    }
    const int b = static_cast<int>(end - start);
    model_->Forward(tokens, b, /*training=*/false, Rng(0), cache);
    for (int i = 0; i < b; ++i) {
      out.push_back({seq, vocab,
                     SoftmaxRows(cache.logits.data() +
                                     static_cast<std::size_t>(i) * seq * vocab,
                                 seq, vocab)});
    }
  }
  return out;
}

}  // namespace cdlm
