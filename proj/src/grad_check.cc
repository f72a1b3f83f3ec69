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

#include "cdlm/grad_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cdlm/objective.h"

namespace cdlm {

double BatchLoss(const Transformer<double>& model,
                 const std::vector<GradCheckExample>& batch,
                 double lambda_noise, std::vector<double>* grads) {
  if (batch.empty()) throw std::invalid_argument("empty gradient-check batch");
  const ModelConfig& cfg = model.config();
  const int seq = cfg.seq_len;
  const int vocab = cfg.vocab.size();
  std::vector<Token> tokens;
  tokens.reserve(batch.size() * static_cast<std::size_t>(seq));
  for (const GradCheckExample& ex : batch) {
    const auto& t = ex.outcome.corrupted.tokens();
    tokens.insert(tokens.end(), t.begin(), t.end());
  }
  ForwardCache<double> cache;
  const int b = static_cast<int>(batch.size());
  model.Forward(tokens, b, /*training=*/false, Rng(0), cache);
  const std::size_t per_seq = static_cast<std::size_t>(seq) * vocab;
  std::vector<double> dlogits;
  if (grads != nullptr) dlogits.assign(cache.logits.size(), 0.0);
  double total = 0.0;
  for (int i = 0; i < b; ++i) {
    const GradCheckExample& ex = batch[static_cast<std::size_t>(i)];
    std::span<const double> logits(cache.logits.data() + i * per_seq, per_seq);
    LossBreakdown lb;
    if (grads != nullptr) {
      lb = MixtureLossWithGrad<double>(
          logits, vocab, ex.clean, ex.outcome, lambda_noise, 1.0 / b,
          std::span<double>(dlogits.data() + i * per_seq, per_seq));
    } else {
      lb = MixtureLoss<double>(logits, vocab, ex.clean, ex.outcome,
                               lambda_noise);
    }
    total += lb.total;
  }
  if (grads != nullptr) {
    grads->assign(model.num_params(), 0.0);
    model.Backward(cache, dlogits, *grads);
  }
  return total / b;
}

GradCheckResult GradCheck(Transformer<double>& model,
                          const std::vector<GradCheckExample>& batch,
                          const GradCheckOptions& options) {
  if (!(options.epsilon > 0.0)) {
    throw std::invalid_argument("epsilon must be positive");
  }
  std::vector<double> analytic;
  BatchLoss(model, batch, options.lambda_noise, &analytic);

  const std::size_t n = model.num_params();
  const std::size_t k =
      std::min<std::size_t>(n, static_cast<std::size_t>(options.num_samples));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(options.seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j =
        i + rng.UniformInt(static_cast<std::uint32_t>(n - i));
    std::swap(order[i], order[j]);
  }

  GradCheckResult result;
  auto params = model.params();
  for (std::size_t s = 0; s < k; ++s) {
    const std::size_t p = order[s];
    const double saved = params[p];
    params[p] = saved + options.epsilon;
    const double up = BatchLoss(model, batch, options.lambda_noise, nullptr);
    params[p] = saved - options.epsilon;
    const double down = BatchLoss(model, batch, options.lambda_noise, nullptr);
    params[p] = saved;
    const double numeric = (up - down) / (2.0 * options.epsilon);
    const double a = analytic[p];
    const double denom =
        std::max({std::abs(a), std::abs(numeric), options.floor});
    const double rel = std::abs(a - numeric) / denom;
    if (rel > result.max_rel_error || s == 0) {
      result.max_rel_error = rel;
      result.worst_param = p;
      result.worst_analytic = a;
      result.worst_numeric = numeric;
    }
    ++result.num_checked;
  }
  return result;
}

}  // namespace cdlm
