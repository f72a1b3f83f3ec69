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

// Absorbing reconstruction loss and the absorbing + uniform mixture loss:
//
//   total = mean_{i in M} CE_i + lambda_noise * mean_{i in N} CE_i
//
// with the replaced-position term defined as 0 when N is empty. Logits are a
// row-major [positions x vocab] table.

#ifndef CDLM_OBJECTIVE_H_
#define CDLM_OBJECTIVE_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdlm/corruption.h"
#include "cdlm/sequence.h"

namespace cdlm {

struct LossBreakdown {
  double masked_term = 0.0;
  double noise_term = 0.0;
  double total = 0.0;
  int masked_count = 0;
  int noise_count = 0;
};

class NonFiniteLossError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace objective_internal {

inline void CheckShape(std::size_t logits_size, int vocab, int positions) {
  if (vocab <= 0 ||
      logits_size != static_cast<std::size_t>(vocab) * positions) {
    throw std::invalid_argument("logit table does not cover positions x vocab");
  }
}

// -log softmax(row)[target], via log-sum-exp.
template <typename T>
double Nll(const T* row, int vocab, Token target) {
  T max_v = row[0];
  for (int v = 1; v < vocab; ++v) max_v = std::max(max_v, row[v]);
  double sum = 0.0;
  for (int v = 0; v < vocab; ++v) {
    sum += std::exp(static_cast<double>(row[v]) - static_cast<double>(max_v));
  }
  const double nll = std::log(sum) + static_cast<double>(max_v) -
                     static_cast<double>(row[target]);
  if (!std::isfinite(nll)) {
    throw NonFiniteLossError("non-finite cross-entropy for target " +
                             std::to_string(target));
  }
  return nll;
}

template <typename T>
double MeanNll(std::span<const T> logits, int vocab,
               std::span<const Token> targets, std::span<const int> positions) {
  double sum = 0.0;
  for (int i : positions) {
    sum += Nll(logits.data() + static_cast<std::size_t>(i) * vocab, vocab,
               targets[static_cast<std::size_t>(i)]);
  }
  return sum / static_cast<double>(positions.size());
}

// dlogits[i] += weight * (softmax(row_i) - onehot(target_i)).
template <typename T>
void AccumulateCeGrad(const T* row, int vocab, Token target, double weight,
                      T* grad_row) {
  T max_v = row[0];
  for (int v = 1; v < vocab; ++v) max_v = std::max(max_v, row[v]);
  double sum = 0.0;
  for (int v = 0; v < vocab; ++v) {
    sum += std::exp(static_cast<double>(row[v] - max_v));
  }
  for (int v = 0; v < vocab; ++v) {
    const double p = std::exp(static_cast<double>(row[v] - max_v)) / sum;
    grad_row[v] += static_cast<T>(weight * (p - (v == target ? 1.0 : 0.0)));
  }
}

}  // namespace objective_internal

// Mean cross-entropy over `masked_set`. Throws std::invalid_argument when the
// set is empty (the average is undefined).
template <typename T>
double MaskedCeLoss(std::span<const T> logits, int vocab,
                    const TokenSequence& targets, const PositionSet& masked_set) {
  objective_internal::CheckShape(logits.size(), vocab, targets.size());
  if (masked_set.empty()) {
    throw std::invalid_argument("masked cross-entropy over an empty set");
  }
  return objective_internal::MeanNll<T>(logits, vocab, targets.span(),
                                        masked_set);
}

// Mixture loss for one sequence. `targets` are the clean tokens.
template <typename T>
LossBreakdown MixtureLoss(std::span<const T> logits, int vocab,
                          const TokenSequence& targets,
                          const CorruptionOutcome& outcome, double lambda_noise) {
  if (!(lambda_noise >= 0.0)) {
    throw std::invalid_argument("lambda_noise must be nonnegative");
  }
  LossBreakdown out;
  out.masked_term = MaskedCeLoss<T>(logits, vocab, targets, outcome.masked_set);
  out.masked_count = static_cast<int>(outcome.masked_set.size());
  out.noise_count = static_cast<int>(outcome.replaced_set.size());
  if (!outcome.replaced_set.empty()) {
    out.noise_term = objective_internal::MeanNll<T>(logits, vocab, targets.span(),
                                                    outcome.replaced_set);
  }
  out.total = out.masked_term + lambda_noise * out.noise_term;
  return out;
}

// MixtureLoss plus its gradient: dlogits += scale * d(total)/d(logits).
// `dlogits` has the shape of `logits`.
template <typename T>
LossBreakdown MixtureLossWithGrad(std::span<const T> logits, int vocab,
                                  const TokenSequence& targets,
                                  const CorruptionOutcome& outcome,
                                  double lambda_noise, double scale,
                                  std::span<T> dlogits) {
  LossBreakdown out =
      MixtureLoss<T>(logits, vocab, targets, outcome, lambda_noise);
  const double wm = scale / static_cast<double>(outcome.masked_set.size());
  for (int i : outcome.masked_set) {
    const std::size_t off = static_cast<std::size_t>(i) * vocab;
    objective_internal::AccumulateCeGrad(logits.data() + off, vocab, targets[i],
                                         wm, dlogits.data() + off);
  }
  if (!outcome.replaced_set.empty() && lambda_noise != 0.0) {
    const double wn = scale * lambda_noise /
                      static_cast<double>(outcome.replaced_set.size());
    for (int i : outcome.replaced_set) {
      const std::size_t off = static_cast<std::size_t>(i) * vocab;
      objective_internal::AccumulateCeGrad(logits.data() + off, vocab,
                                           targets[i], wn, dlogits.data() + off);
    }
  }
  return out;
}

// Uniform mean of per-sequence breakdowns (counts are summed).
LossBreakdown AverageBreakdowns(std::span<const LossBreakdown> items);

}  // namespace cdlm

#endif  // CDLM_OBJECTIVE_H_
