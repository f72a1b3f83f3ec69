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
#include "cdlm/sudoku_experiments.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cdlm/refinement.h"

namespace cdlm::sudoku {

namespace {

constexpr std::uint64_t kLocalizationStream = 1;
constexpr std::uint64_t kCorrectionNoiseStream = 2;
constexpr std::uint64_t kCorrectionEditStream = 3;
constexpr std::uint64_t kCompletionStream = 4;

// Stream id for a ratio, so the same ratio yields the same corruption no
// matter which other ratios are requested.
std::uint64_t RatioKey(double r) {
  return static_cast<std::uint64_t>(std::llround(r * 1e6));
}

void RequireSolutions(const std::vector<Board>& boards) {
  if (boards.empty()) throw std::invalid_argument("no evaluation boards");
  for (const Board& b : boards) {
    if (!IsSolution(b)) throw std::invalid_argument("evaluation board is not a solution");
  }
}

int MaxStep(const std::vector<int>& steps) {
  if (steps.empty()) throw std::invalid_argument("no step counts requested");
  for (int s : steps) {
    if (s < 1) throw std::invalid_argument("step counts must be >= 1");
  }
  return *std::max_element(steps.begin(), steps.end());
}

}  // namespace

Report RunLocalizationExperiment(DenoiserInterface& model,
                                 const std::vector<Board>& boards,
                                 const LocalizationOptions& options) {
  RequireSolutions(boards);
  Report report = SudokuReport();
  const long long n = static_cast<long long>(boards.size());
  for (double ratio : options.noise_ratios) {
    if (CellCount(ratio) < 1) {
      throw std::invalid_argument("noise ratio corrupts no cells");
    }
    const Rng base = Rng(options.seed).Split(kLocalizationStream).Split(RatioKey(ratio));
    std::vector<Board> inputs;
    std::vector<PositionSet> noisy;
    for (std::size_t b = 0; b < boards.size(); ++b) {
      NoisyBoard nb = AddUniformNoise(boards[b], ratio, base.Split(b));
      inputs.push_back(nb.board);
      noisy.push_back(nb.noisy);
    }
    const std::vector<Distribution> dists = model.PredictBatch(inputs);
    std::vector<LocalizationRecord> observed;
    std::vector<LocalizationRecord> maxprob;
    for (std::size_t b = 0; b < boards.size(); ++b) {
      observed.push_back({ObservedTokenProbabilities(dists[b], inputs[b]), noisy[b]});
      maxprob.push_back(
          {ConfidenceFromDistribution(dists[b], model.vocab(), true).confidences,
           noisy[b]});
    }
    const std::map<std::string, std::string> keys = {
        {"experiment", "localization"}, {"noise_ratio", FormatNumber(ratio)}};
    const RatioResult ro = CleanNoiseRatio(observed);
    const RatioResult rm = CleanNoiseRatio(maxprob);
    report.Add(keys, "clean_confidence", ro.clean_mean, n);
    report.Add(keys, "noisy_confidence", ro.noisy_mean, n);
    report.Add(keys, "confidence_ratio", ro.ratio, n);
    report.Add(keys, "ratio_infinite", ro.infinite ? 1.0 : 0.0, n);
    report.Add(keys, "clean_confidence_maxprob", rm.clean_mean, n);
    report.Add(keys, "noisy_confidence_maxprob", rm.noisy_mean, n);
    report.Add(keys, "confidence_ratio_maxprob", rm.ratio, n);
    report.Add(keys, "confidence_gap", MeanConfidenceGap(observed), n);
    report.Add(keys, "hit_at_1", HitRate(observed, 1), n);
  }
  return report;
}

Report RunCorrectionExperiment(DenoiserInterface& model,
                               const std::vector<Board>& boards,
                               const CorrectionOptions& options) {
  RequireSolutions(boards);
  const int max_t = MaxStep(options.steps);
  Report report = SudokuReport();
  const long long n = static_cast<long long>(boards.size());
  for (double noise : options.noise_ratios) {
    const Rng noise_rng =
        Rng(options.seed).Split(kCorrectionNoiseStream).Split(RatioKey(noise));
    std::vector<NoisyBoard> noisy;
    for (std::size_t b = 0; b < boards.size(); ++b) {
      noisy.push_back(AddUniformNoise(boards[b], noise, noise_rng.Split(b)));
    }
    for (double editable : options.editable_ratios) {
      const Rng edit_rng = Rng(options.seed)
                               .Split(kCorrectionEditStream)
                               .Split(RatioKey(noise))
                               .Split(RatioKey(editable));
      std::vector<Board> inputs;
      std::vector<PositionSet> sets;
      int clamped = 0;
      for (std::size_t b = 0; b < boards.size(); ++b) {
        EditableSpec spec =
            MakeEditableSpec(noisy[b].noisy, noise, editable, edit_rng.Split(b));
        clamped += spec.clamped ? 1 : 0;
        inputs.push_back(noisy[b].board);
        sets.push_back(std::move(spec.editable_set));
      }
      RefinementConfig cfg;
      cfg.tau = options.tau;
      cfg.steps = max_t;
      cfg.variant = RefineVariant::kAlg2;
      const auto results = RefineEditableBatch(model, inputs, sets, cfg);
      for (int t : options.steps) {
        std::vector<TokenSequence> finals;
        for (const auto& r : results) {
          finals.push_back(r.trace.steps[static_cast<std::size_t>(t - 1)].output);
        }
        const auto exact = BoardAccuracy(finals, boards);
        const auto cons = BoardAccuracy(finals, boards, BoardAccuracyMode::kConstraint);
        const std::map<std::string, std::string> keys = {
            {"experiment", "correction"},
            {"noise_ratio", FormatNumber(noise)},
            {"editable_ratio", FormatNumber(editable)},
            {"step", std::to_string(t)}};
        report.Add(keys, "board_accuracy", exact.rate, n);
        report.Add(keys, "board_accuracy_constraint", cons.rate, n);
        report.Add(keys, "residual_masks", exact.residual_masks, n);
        const CellStats cells = CellAccuracy(finals, boards);
        report.Add(keys, "cell_accuracy", cells.accuracy, n);
        report.Add(keys, "mean_masked_cells", cells.mean_masked_cells, n);
        report.Add(keys, "editable_clamped", clamped, n);
      }
    }
  }
  return report;
}

Report RunCompletionExperiment(DenoiserInterface& model,
                               const std::vector<Board>& boards,
                               const CompletionOptions& options) {
  RequireSolutions(boards);
  const int max_t = MaxStep(options.steps);
  Report report = SudokuReport();
  const long long n = static_cast<long long>(boards.size());
  for (double ratio : options.mask_ratios) {
    const Rng base = Rng(options.seed).Split(kCompletionStream).Split(RatioKey(ratio));
    std::vector<Board> puzzles;
    for (std::size_t b = 0; b < boards.size(); ++b) {
      puzzles.push_back(MaskCells(boards[b], ratio, base.Split(b)));
    }
    std::vector<std::vector<TokenSequence>> per_step(static_cast<std::size_t>(max_t));
    if (CellCount(ratio) == 0) {
      for (auto& v : per_step) v = puzzles;
    } else {
      RefinementConfig cfg;
      cfg.tau = options.tau;
      cfg.steps = max_t;
      const auto results = RefineBatch(model, puzzles, cfg);
      for (const auto& r : results) {
        for (int t = 0; t < max_t; ++t) {
          per_step[static_cast<std::size_t>(t)].push_back(
              r.trace.steps[static_cast<std::size_t>(t)].output);
        }
      }
    }
    for (int t : options.steps) {
      const auto& finals = per_step[static_cast<std::size_t>(t - 1)];
      const auto exact = BoardAccuracy(finals, boards);
      const auto cons = BoardAccuracy(finals, boards, BoardAccuracyMode::kConstraint);
      const std::map<std::string, std::string> keys = {
          {"experiment", "completion"},
          {"mask_ratio", FormatNumber(ratio)},
          {"step", std::to_string(t)}};
      report.Add(keys, "accuracy", exact.rate, n);
      report.Add(keys, "accuracy_constraint", cons.rate, n);
      report.Add(keys, "residual_masks", exact.residual_masks, n);
      const CellStats cells = CellAccuracy(finals, boards);
      report.Add(keys, "cell_accuracy", cells.accuracy, n);
      report.Add(keys, "mean_masked_cells", cells.mean_masked_cells, n);
    }
  }
  return report;
}

}  // namespace cdlm::sudoku
