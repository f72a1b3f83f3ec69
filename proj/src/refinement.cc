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
#include "cdlm/refinement.h"

#include <algorithm>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace cdlm {

namespace {

void CheckBatch(const std::vector<TokenSequence>& z0,
                const std::vector<Distribution>& dists) {
  if (dists.size() != z0.size()) {
    throw std::runtime_error("denoiser returned the wrong number of outputs");
  }
  for (std::size_t i = 0; i < z0.size(); ++i) {
    if (dists[i].positions != z0[i].size()) {
      throw std::runtime_error("denoiser output length does not match input");
    }
  }
}

nlohmann::json StepJson(const RefinementStep& s, int index,
                        const std::string& algorithm) {
  return {{"algorithm", algorithm},
          {"step", index},
          {"input", s.input.tokens()},
          {"predictions", s.predictions.tokens()},
          {"confidences", s.confidences},
          {"remask", s.remask},
          {"output", s.output.tokens()}};
}

void CheckEditable(const PositionSet& e, int n) {
  if (!IsSortedUnique(e) || (!e.empty() && (e.front() < 0 || e.back() >= n))) {
    throw std::invalid_argument("editable set must be sorted, unique, in range");
  }
}

}  // namespace

void RefinementConfig::Validate() const {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::invalid_argument("tau must lie in (0, 1)");
  }
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (variant == RefineVariant::kAlg2 && !editable_set) {
    throw std::invalid_argument("editable refinement needs an editable set");
  }
}

void CompletionConfig::Validate() const {
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (remask_budget < 0) throw std::invalid_argument("remask budget must be >= 0");
}

std::string RefinementTrace::ToJsonl() const {
  std::string out;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    out += StepJson(steps[t], static_cast<int>(t), algorithm).dump();
    out += '\n';
  }
  return out;
}

RefinementTrace RefinementTrace::FromJsonl(const std::string& text,
                                           const Vocabulary& vocab) {
  RefinementTrace trace;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    trace.algorithm = j.at("algorithm").get<std::string>();
    trace.steps.push_back(
        {TokenSequence(j.at("input").get<std::vector<Token>>(), vocab),
         TokenSequence(j.at("predictions").get<std::vector<Token>>(), vocab),
         j.at("confidences").get<std::vector<double>>(),
         j.at("remask").get<PositionSet>(),
         TokenSequence(j.at("output").get<std::vector<Token>>(), vocab)});
  }
  return trace;
}

std::vector<RefinementResult> RefineBatch(DenoiserInterface& model,
                                          const std::vector<TokenSequence>& z0,
                                          const RefinementConfig& cfg) {
  cfg.Validate();
  const Vocabulary& vocab = model.vocab();
  const Token mask = vocab.mask_id();
  std::vector<TokenSequence> z = z0;
  std::vector<RefinementResult> out;
  out.reserve(z0.size());
  for (const TokenSequence& s : z0) {
    out.push_back({s, RefinementTrace{"alg1", {}, false, false}});
  }
  for (int t = 0; t < cfg.steps && !z.empty(); ++t) {
    const std::vector<Distribution> dists = model.PredictBatch(z);
    CheckBatch(z, dists);
    for (std::size_t b = 0; b < z.size(); ++b) {
      ConfidencePrediction cp =
          ConfidenceFromDistribution(dists[b], vocab, /*exclude_mask=*/false);
      const TokenSequence& in = z[b];
      TokenSequence pred = in;
      for (int i = 0; i < in.size(); ++i) {
        if (in[i] == mask || cfg.argmax_everywhere) pred.Set(i, cp.predictions[i]);
      }
      RefinementStep step{in, pred, cp.confidences, {}, pred};
      for (int i = 0; i < in.size(); ++i) {
        if (cp.confidences[static_cast<std::size_t>(i)] < cfg.tau) {
          step.remask.push_back(i);
          step.output.Set(i, mask);
        }
      }
      z[b] = step.output;
      out[b].trace.steps.push_back(std::move(step));
    }
  }
  for (std::size_t b = 0; b < z.size(); ++b) out[b].final = z[b];
  return out;
}

RefinementResult Refine(DenoiserInterface& model, const TokenSequence& z0,
                        const RefinementConfig& cfg) {
  return std::move(RefineBatch(model, {z0}, cfg)[0]);
}

std::vector<RefinementResult> RefineEditableBatch(
    DenoiserInterface& model, const std::vector<TokenSequence>& z0,
    const std::vector<PositionSet>& editable, const RefinementConfig& cfg) {
  if (!(cfg.tau > 0.0 && cfg.tau < 1.0)) {
    throw std::invalid_argument("tau must lie in (0, 1)");
  }
  if (cfg.steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (editable.size() != z0.size()) {
    throw std::invalid_argument("one editable set per sequence is required");
  }
  const Vocabulary& vocab = model.vocab();
  const Token mask = vocab.mask_id();
  std::vector<TokenSequence> z = z0;
  std::vector<RefinementResult> out;
  out.reserve(z0.size());
  for (std::size_t b = 0; b < z0.size(); ++b) {
    CheckEditable(editable[b], z0[b].size());
    out.push_back({z0[b], RefinementTrace{"alg2", {}, editable[b].empty(), false}});
  }
  for (int t = 0; t < cfg.steps && !z.empty(); ++t) {
    const std::vector<Distribution> dists = model.PredictBatch(z);
    CheckBatch(z, dists);
    for (std::size_t b = 0; b < z.size(); ++b) {
      ConfidencePrediction cp =
          ConfidenceFromDistribution(dists[b], vocab, /*exclude_mask=*/true);
      const TokenSequence& in = z[b];
      RefinementStep step{in, cp.predictions, cp.confidences, {}, in};
      for (int i : editable[b]) {
        if (cp.confidences[static_cast<std::size_t>(i)] < cfg.tau) {
          step.remask.push_back(i);
          step.output.Set(i, mask);
        } else {
          step.output.Set(i, cp.predictions[i]);
        }
      }
      z[b] = step.output;
      out[b].trace.steps.push_back(std::move(step));
    }
  }
  for (std::size_t b = 0; b < z.size(); ++b) out[b].final = z[b];
  return out;
}

RefinementResult RefineEditable(DenoiserInterface& model,
                                const TokenSequence& z0,
                                const RefinementConfig& cfg) {
  cfg.Validate();
  return std::move(RefineEditableBatch(model, {z0}, {*cfg.editable_set}, cfg)[0]);
}

std::vector<TokenSequence> FillMasksBatch(
    DenoiserInterface& model, const std::vector<TokenSequence>& z) {
  std::vector<TokenSequence> out = z;
  if (z.empty()) return out;
  const std::vector<ConfidencePrediction> pred =
      ConfidencePredictBatch(model, z, /*exclude_mask=*/true);
  for (std::size_t b = 0; b < z.size(); ++b) {
    for (int i = 0; i < z[b].size(); ++i) {
      if (z[b].IsMasked(i)) out[b].Set(i, pred[b].predictions[i]);
    }
  }
  return out;
}

int RemaskCount(int k0, int t, int steps) {
  if (steps < 1 || t < 0 || t >= steps || k0 < 0) {
    throw std::invalid_argument("invalid schedule arguments");
  }
  // round_half_down(a / b) = floor((2a + b - 1) / 2b), exact in integers.
  const long long a = static_cast<long long>(k0) * (steps - t - 1);
  const long long b = steps;
  return static_cast<int>((2 * a + b - 1) / (2 * b));
}

PositionSet LowestK(const std::vector<double>& scores,
                    const PositionSet& candidates, int k) {
  PositionSet order = candidates;
  std::stable_sort(order.begin(), order.end(), [&scores](int x, int y) {
    const double sx = scores[static_cast<std::size_t>(x)];
    const double sy = scores[static_cast<std::size_t>(y)];
    return sx < sy || (sx == sy && x < y);
  });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(std::max(k, 0))));
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<RefinementResult> DecodeCompletionBatch(
    DenoiserInterface& model, const std::vector<TokenSequence>& prompts,
    const CompletionConfig& cfg) {
  cfg.Validate();
  const Vocabulary& vocab = model.vocab();
  const Token mask = vocab.mask_id();
  const std::size_t n = prompts.size();
  std::vector<TokenSequence> z = prompts;
  std::vector<PositionSet> region(n);
  std::vector<int> budget(n);
  std::vector<std::vector<double>> frozen(n);
  std::vector<std::vector<bool>> written(n);
  std::vector<RefinementResult> out;
  out.reserve(n);
  for (std::size_t b = 0; b < n; ++b) {
    region[b] = prompts[b].MaskedPositions();
    if (region[b].empty()) {
      throw std::invalid_argument("completion prompt has no masked region");
    }
    budget[b] = cfg.remask_budget;
    bool clamped = false;
    if (budget[b] > static_cast<int>(region[b].size())) {
      std::cerr << "warning: remask budget " << budget[b]
                << " clamped to generated region size " << region[b].size()
                << '\n';
      budget[b] = static_cast<int>(region[b].size());
      clamped = true;
    }
    frozen[b].assign(static_cast<std::size_t>(prompts[b].size()), 0.0);
    written[b].assign(static_cast<std::size_t>(prompts[b].size()), false);
    out.push_back({prompts[b], RefinementTrace{"completion", {}, false, clamped}});
  }
  for (int t = 0; t < cfg.steps && n > 0; ++t) {
    const std::vector<Distribution> dists = model.PredictBatch(z);
    CheckBatch(z, dists);
    for (std::size_t b = 0; b < n; ++b) {
      ConfidencePrediction cp =
          ConfidenceFromDistribution(dists[b], vocab, /*exclude_mask=*/true);
      const TokenSequence& in = z[b];
      TokenSequence filled = in;
      for (int i = 0; i < in.size(); ++i) {
        if (in[i] == mask) filled.Set(i, cp.predictions[i]);
      }
      std::vector<double> rank(static_cast<std::size_t>(in.size()));
      for (int i = 0; i < in.size(); ++i) {
        const auto u = static_cast<std::size_t>(i);
        if (cfg.confidence_mode == ConfidenceMode::kLive) {
          rank[u] = dists[b].at(i, filled[i]);
        } else {
          if (in[i] == mask && !written[b][u] && Contains(region[b], i)) {
            frozen[b][u] = cp.confidences[u];
            written[b][u] = true;
          }
          rank[u] = frozen[b][u];
        }
      }
      const int k = RemaskCount(budget[b], t, cfg.steps);
      RefinementStep step{in, filled, rank, LowestK(rank, region[b], k), filled};
      for (int i : step.remask) step.output.Set(i, mask);
      z[b] = step.output;
      out[b].trace.steps.push_back(std::move(step));
    }
  }
  for (std::size_t b = 0; b < n; ++b) out[b].final = z[b];
  return out;
}

RefinementResult DecodeCompletion(DenoiserInterface& model,
                                  const TokenSequence& prompt,
                                  const CompletionConfig& cfg) {
  return std::move(DecodeCompletionBatch(model, {prompt}, cfg)[0]);
}

}  // namespace cdlm
