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

#include <algorithm>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "cdlm/checkpoint.h"
#include "cdlm/denoiser.h"
#include "cdlm/sudoku.h"
#include "cdlm/sudoku_experiments.h"
#include "cli/cli.h"

namespace cdlm::cli {

namespace {

struct SudokuEvalArgs {
  std::string checkpoint;
  std::string boards;
  int limit = 0;
  int max_batch = 64;
  std::uint64_t seed = 0;
  std::string out;
  std::vector<double> noise;
  std::vector<double> editable;
  std::vector<double> mask;
  int steps = 0;
  double tau = 0.0;
};

void AddCommonOptions(CLI::App* sub, SudokuEvalArgs& a,
                      const std::string& default_out) {
  a.out = default_out;
  sub->add_option("--checkpoint", a.checkpoint, "Model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--boards", a.boards, "Evaluation board file (solutions)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--limit", a.limit, "Use the first N boards (0 = all)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--batch", a.max_batch, "Boards per forward pass")
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed", a.seed, "Run seed");
  sub->add_option("--out", a.out, "Output directory");
}

nlohmann::json CommonConfig(const SudokuEvalArgs& a) {
  return {{"checkpoint", a.checkpoint}, {"boards", a.boards},
          {"limit", a.limit},           {"batch", a.max_batch},
          {"seed", a.seed}};
}

std::vector<sudoku::Board> LoadBoards(const SudokuEvalArgs& a) {
  std::vector<sudoku::Board> boards = sudoku::ReadBoards(a.boards);
  if (a.limit > 0 && static_cast<int>(boards.size()) > a.limit) {
    boards.erase(boards.begin() + a.limit, boards.end());
  }
  if (boards.empty()) throw UsageError("no boards in " + a.boards);
  for (const sudoku::Board& b : boards) {
    if (!sudoku::IsSolution(b)) {
      throw UsageError(a.boards + " holds a board that is not a solution");
    }
  }
  return boards;
}

std::unique_ptr<TransformerDenoiser> LoadSudokuModel(const SudokuEvalArgs& a,
                                                     RunManifest& manifest) {
  const Checkpoint ckpt = LoadCheckpoint(a.checkpoint);
  if (ckpt.config.vocab != sudoku::Vocab() ||
      ckpt.config.seq_len != sudoku::kCells) {
    throw UsageError(a.checkpoint + " is not a Sudoku model");
  }
  manifest.Set("model", {{"config", ckpt.config.ToJson()},
                         {"step", ckpt.step},
                         {"metadata", ckpt.metadata}});
  auto model = std::make_shared<const Transformer<float>>(
      ModelFromCheckpoint(ckpt));
  return std::make_unique<TransformerDenoiser>(model, a.max_batch);
}

void WriteReport(RunManifest& manifest, const Report& report) {
  const std::string csv = manifest.Path("metrics.csv");
  const std::string json = manifest.Path("metrics.json");
  report.WriteCsv(csv);
  report.WriteJson(json);
  manifest.AddOutput("metrics_csv", csv);
  manifest.AddOutput("metrics_json", json);
  std::cout << report.ToCsv();
}

std::vector<int> StepRange(int steps) {
  std::vector<int> out;
  for (int t = 1; t <= steps; ++t) out.push_back(t);
  return out;
}

}  // namespace

Runner RegisterEvalLocalize(CLI::App& app) {
  auto args = std::make_shared<SudokuEvalArgs>();
  args->noise = {0.1, 0.2, 0.3};
  CLI::App* sub = app.add_subcommand(
      "eval-localize", "Confidence on clean versus noisy Sudoku cells");
  AddCommonOptions(sub, *args, "runs/eval_localize");
  sub->add_option("--noise", args->noise, "Noise ratios")
      ->check(CLI::Range(0.0, 1.0));
  return [args, sub]() {
    if (!sub->parsed()) return;
    const SudokuEvalArgs& a = *args;
    nlohmann::json config = CommonConfig(a);
    config["noise"] = a.noise;
    RunManifest manifest(a.out, "eval-localize", config);
    RunRecorded(manifest, [&] {
      const auto boards = LoadBoards(a);
      auto model = LoadSudokuModel(a, manifest);
      sudoku::LocalizationOptions opt;
      opt.noise_ratios = a.noise;
      opt.seed = a.seed;
      WriteReport(manifest,
                  sudoku::RunLocalizationExperiment(*model, boards, opt));
    });
  };
}

Runner RegisterEvalCorrect(CLI::App& app) {
  auto args = std::make_shared<SudokuEvalArgs>();
  args->noise = {0.1, 0.2};
  args->editable = {0.4, 0.5, 0.6};
  args->steps = 3;
  args->tau = 0.9;
  CLI::App* sub = app.add_subcommand(
      "eval-correct", "Editable-set refinement of noisy Sudoku boards");
  AddCommonOptions(sub, *args, "runs/eval_correct");
  sub->add_option("--noise", args->noise, "Noise ratios")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--editable", args->editable, "Editable ratios")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--T", args->steps,
                  "Refinement steps; accuracy is reported after each step")
      ->check(CLI::PositiveNumber);
  sub->add_option("--tau", args->tau, "Remasking threshold")
      ->check(CLI::Range(0.0, 1.0));
  return [args, sub]() {
    if (!sub->parsed()) return;
    const SudokuEvalArgs& a = *args;
    nlohmann::json config = CommonConfig(a);
    config["noise"] = a.noise;
    config["editable"] = a.editable;
    config["T"] = a.steps;
    config["tau"] = a.tau;
    RunManifest manifest(a.out, "eval-correct", config);
    RunRecorded(manifest, [&] {
      const auto boards = LoadBoards(a);
      auto model = LoadSudokuModel(a, manifest);
      sudoku::CorrectionOptions opt;
      opt.noise_ratios = a.noise;
      opt.editable_ratios = a.editable;
      opt.steps = StepRange(a.steps);
      opt.tau = a.tau;
      opt.seed = a.seed;
      WriteReport(manifest,
                  sudoku::RunCorrectionExperiment(*model, boards, opt));
    });
  };
}

Runner RegisterEvalComplete(CLI::App& app) {
  auto args = std::make_shared<SudokuEvalArgs>();
  args->mask = {0.3, 0.4, 0.5, 0.6};
  args->steps = 8;
  args->tau = 0.7;
  CLI::App* sub = app.add_subcommand(
      "eval-complete", "Threshold-remasking completion of masked Sudoku boards");
  AddCommonOptions(sub, *args, "runs/eval_complete");
  sub->add_option("--mask", args->mask, "Mask ratios")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--T", args->steps,
                  "Sampling steps; accuracy is reported after each step")
      ->check(CLI::PositiveNumber);
  sub->add_option("--tau", args->tau, "Remasking threshold")
      ->check(CLI::Range(0.0, 1.0));
  return [args, sub]() {
    if (!sub->parsed()) return;
    const SudokuEvalArgs& a = *args;
    nlohmann::json config = CommonConfig(a);
    config["mask"] = a.mask;
    config["T"] = a.steps;
    config["tau"] = a.tau;
    RunManifest manifest(a.out, "eval-complete", config);
    RunRecorded(manifest, [&] {
      const auto boards = LoadBoards(a);
      auto model = LoadSudokuModel(a, manifest);
      sudoku::CompletionOptions opt;
      opt.mask_ratios = a.mask;
      opt.steps = StepRange(a.steps);
      opt.tau = a.tau;
      opt.seed = a.seed;
      WriteReport(manifest,
                  sudoku::RunCompletionExperiment(*model, boards, opt));
    });
  };
}

}  // namespace cdlm::cli
