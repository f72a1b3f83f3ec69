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
// Drivers for the three Sudoku experiments: single-pass noise localization,
// editable-set correction and confidence-guided completion.

#ifndef CDLM_SUDOKU_EXPERIMENTS_H_
#define CDLM_SUDOKU_EXPERIMENTS_H_

#include <vector>

#include "cdlm/denoiser.h"
#include "cdlm/metrics.h"
#include "cdlm/sudoku.h"

namespace cdlm::sudoku {

// Localization reports two confidence readings per cell: "observed" is the
// probability of the digit currently in the cell, "maxprob" is the largest
// probability over digits.
struct LocalizationOptions {
  std::vector<double> noise_ratios = {0.1, 0.2, 0.3};
  std::uint64_t seed = 0;
};

// Metrics per noise ratio: clean_confidence, noisy_confidence,
// confidence_ratio (observed), the same three with a _maxprob suffix,
// confidence_gap and hit_at_1 (observed), and ratio_infinite.
Report RunLocalizationExperiment(DenoiserInterface& model,
                                 const std::vector<Board>& boards,
                                 const LocalizationOptions& options);

struct CorrectionOptions {
  std::vector<double> noise_ratios = {0.1, 0.2};
  std::vector<double> editable_ratios = {0.4, 0.5, 0.6};
  std::vector<int> steps = {1, 2, 3};
  double tau = 0.9;
  std::uint64_t seed = 0;
};

// board_accuracy (exact match), board_accuracy_constraint, residual_masks
// and editable_clamped per (noise, editable, step).
Report RunCorrectionExperiment(DenoiserInterface& model,
                               const std::vector<Board>& boards,
                               const CorrectionOptions& options);

struct CompletionOptions {
  std::vector<double> mask_ratios = {0.3, 0.4, 0.5, 0.6};
  std::vector<int> steps = {1, 2, 3, 4, 5, 6, 7, 8};
  double tau = 0.7;
  std::uint64_t seed = 0;
};

// accuracy, accuracy_constraint and residual_masks per (mask ratio, step),
// from threshold remasking run to the largest requested step.
Report RunCompletionExperiment(DenoiserInterface& model,
                               const std::vector<Board>& boards,
                               const CompletionOptions& options);

}  // namespace cdlm::sudoku

#endif  // CDLM_SUDOKU_EXPERIMENTS_H_
