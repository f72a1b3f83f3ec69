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

// Finite-difference validation of the mixture-loss gradient through the
// transformer.

#ifndef CDLM_GRAD_CHECK_H_
#define CDLM_GRAD_CHECK_H_

#include <cstddef>
#include <vector>

#include "cdlm/corruption.h"
#include "cdlm/rng.h"
#include "cdlm/sequence.h"
#include "cdlm/transformer.h"

namespace cdlm {

struct GradCheckExample {
  TokenSequence clean;
  CorruptionOutcome outcome;
};

struct GradCheckOptions {
  double epsilon = 1e-4;
  int num_samples = 256;
  double lambda_noise = 1.0;
  // Denominator floor for the relative error.
  double floor = 1e-6;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  int num_checked = 0;
};

// Batch-mean mixture loss (eval mode) and, if `grads` is non-null, its
// gradient with respect to every parameter.
double BatchLoss(const Transformer<double>& model,
                 const std::vector<GradCheckExample>& batch,
                 double lambda_noise, std::vector<double>* grads);

// Compares the analytic gradient with central differences at
// options.num_samples parameters drawn without replacement. Relative error is
// |a - n| / max(|a|, |n|, floor). Throws NonFiniteLossError or
// NonFiniteActivationError if any evaluation is non-finite.
GradCheckResult GradCheck(Transformer<double>& model,
                          const std::vector<GradCheckExample>& batch,
                          const GradCheckOptions& options);

}  // namespace cdlm

#endif  // CDLM_GRAD_CHECK_H_
