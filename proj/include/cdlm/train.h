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
// Training loop for the absorbing-only (MDLM) and mixture (CDLM) objectives
// with an AdamW optimizer.

#ifndef CDLM_TRAIN_H_
#define CDLM_TRAIN_H_

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cdlm/corruption.h"
#include "cdlm/objective.h"
#include "cdlm/sequence.h"
#include "cdlm/transformer.h"

namespace cdlm {

enum class Objective { kAbsorbing, kMixture };
enum class LrSchedule { kConstant, kWarmupCosine };

std::string ObjectiveName(Objective o);
Objective ParseObjective(const std::string& s);
std::string LrScheduleName(LrSchedule s);
LrSchedule ParseLrSchedule(const std::string& s);

struct TrainConfig {
  int batch_size = 64;
  std::int64_t steps = 200000;
  double learning_rate = 1e-4;
  double weight_decay = 0.01;
  Objective objective = Objective::kMixture;
  MixtureConfig mixture;
  std::uint64_t seed = 0;
  LrSchedule schedule = LrSchedule::kConstant;
  std::int64_t warmup_steps = 0;
  // Cosine floor as a fraction of learning_rate.
  double min_lr_ratio = 0.1;
  // Global gradient-norm clip; 0 disables.
  double grad_clip = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::int64_t log_every = 100;

  // Batch 64, 200k steps, lr 1e-4, weight decay 0.01.
  static TrainConfig Full();
  // Batch 32, 20k steps, lr 5e-4 with 500 warmup steps and cosine decay,
  // clip 1.0, mask ratio law U(0.2, 0.9), alpha 0.1.
  static TrainConfig Desk();

  // Throws std::invalid_argument on out-of-range fields.
  void Validate() const;
  double LearningRateAt(std::int64_t step) const;

  nlohmann::json ToJson() const;
  static TrainConfig FromJson(const nlohmann::json& j);
};

struct AdamWState {
  std::vector<float> m;
  std::vector<float> v;
  std::int64_t step = 0;  // completed updates
};

struct LossRow {
  std::int64_t step = 0;
  double masked_term = 0.0;
  double noise_term = 0.0;
  double total = 0.0;
};

class TrainingHaltedError : public std::runtime_error {
 public:
  TrainingHaltedError(const std::string& what, std::string dump_path)
      : std::runtime_error(what), dump_path_(std::move(dump_path)) {}
  const std::string& dump_path() const { return dump_path_; }

 private:
  std::string dump_path_;
};

struct TrainHooks {
  // Called with the mean breakdown over each log window.
  std::function<void(const LossRow&)> on_log;
  // Called after every update with the number of completed updates.
  std::function<void(std::int64_t step)> after_step;
  // Directory receiving the offending batch when a loss is non-finite.
  std::string dump_dir = ".";
};

// Corruption of example `index` of the batch at `step`, shared by both
// objectives: the absorbing objective is the mixture with Stage 2 disabled.
CorruptionOutcome CorruptForTraining(const TokenSequence& clean,
                                     const TrainConfig& cfg, std::int64_t step,
                                     int index);

// Dataset indices of the batch at `step`.
std::vector<std::size_t> BatchIndices(const TrainConfig& cfg,
                                      std::int64_t step, std::size_t n_data);

// Initial parameters for cfg.seed.
void InitForTraining(Transformer<float>& model, const TrainConfig& cfg);

// Runs updates opt.step + 1 .. cfg.steps. Deterministic given (model, opt,
// data, cfg). Throws TrainingHaltedError on a non-finite loss after writing
// the batch to hooks.dump_dir.
std::vector<LossRow> Train(Transformer<float>& model, AdamWState& opt,
                           const std::vector<TokenSequence>& data,
                           const TrainConfig& cfg, const TrainHooks& hooks = {});

// Single update on explicit examples; returns the batch-mean breakdown.
LossBreakdown TrainStep(Transformer<float>& model, AdamWState& opt,
                        const std::vector<TokenSequence>& clean,
                        const std::vector<CorruptionOutcome>& corrupted,
                        const TrainConfig& cfg, Rng dropout_rng);

void WriteLossCsv(const std::string& path, const std::vector<LossRow>& rows);

}  // namespace cdlm

#endif  // CDLM_TRAIN_H_
