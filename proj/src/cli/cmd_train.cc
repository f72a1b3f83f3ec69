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
#include <filesystem>
#include <iostream>
#include <optional>

#include "cdlm/checkpoint.h"
#include "cdlm/sudoku.h"
#include "cdlm/train.h"
#include "cli/cli.h"

namespace cdlm::cli {

namespace {

struct TrainArgs {
  std::string data;
  std::string out = "runs/train";
  std::string preset = "desk";
  std::optional<std::string> objective;
  std::optional<double> alpha;
  std::optional<double> lambda_noise;
  std::optional<double> mask_lo;
  std::optional<double> mask_hi;
  std::optional<bool> sample_alpha;
  std::optional<double> alpha_max;
  std::optional<std::int64_t> steps;
  std::optional<int> batch_size;
  std::optional<double> lr;
  std::optional<double> weight_decay;
  std::optional<std::string> schedule;
  std::optional<std::int64_t> warmup;
  std::optional<double> grad_clip;
  std::optional<int> layers;
  std::optional<int> hidden;
  std::optional<int> heads;
  std::optional<int> mlp_ratio;
  std::optional<double> dropout;
  std::uint64_t seed = 0;
  std::int64_t log_every = 100;
  std::int64_t checkpoint_every = 1000;
  bool resume = false;
};

template <typename T, typename U>
void Apply(const std::optional<T>& v, U& field) {
  if (v) field = static_cast<U>(*v);
}

}  // namespace

Runner RegisterTrain(CLI::App& app) {
  auto args = std::make_shared<TrainArgs>();
  CLI::App* sub = app.add_subcommand(
      "train", "Train an MDLM (absorbing) or CDLM (mixture) Sudoku denoiser");
  sub->add_option("--data", args->data, "Training boards, one per line")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", args->out, "Output directory");
  sub->add_option("--preset", args->preset, "Model and optimizer defaults")
      ->check(CLI::IsMember({"desk", "full"}));
  sub->add_option("--objective", args->objective, "absorbing | mixture")
      ->check(CLI::IsMember({"absorbing", "mixture", "mdlm", "cdlm"}));
  sub->add_option("--alpha", args->alpha, "Uniform replacement probability");
  sub->add_option("--lambda-noise", args->lambda_noise,
                  "Weight of the replaced-position term");
  sub->add_option("--mask-lo", args->mask_lo, "Mask ratio law lower bound");
  sub->add_option("--mask-hi", args->mask_hi, "Mask ratio law upper bound");
  sub->add_option("--sample-alpha", args->sample_alpha,
                  "Draw alpha ~ U(0, alpha-max) per example");
  sub->add_option("--alpha-max", args->alpha_max, "Upper bound for --sample-alpha");
  sub->add_option("--steps", args->steps, "Optimizer updates");
  sub->add_option("--batch-size", args->batch_size, "Sequences per update");
  sub->add_option("--lr", args->lr, "Peak learning rate");
  sub->add_option("--weight-decay", args->weight_decay, "Decoupled weight decay");
  sub->add_option("--schedule", args->schedule, "constant | warmup-cosine")
      ->check(CLI::IsMember({"constant", "warmup-cosine"}));
  sub->add_option("--warmup", args->warmup, "Linear warmup steps");
  sub->add_option("--grad-clip", args->grad_clip, "Global norm clip (0 = off)");
  sub->add_option("--layers", args->layers, "Transformer blocks");
  sub->add_option("--hidden", args->hidden, "Model width");
  sub->add_option("--heads", args->heads, "Attention heads");
  sub->add_option("--mlp-ratio", args->mlp_ratio, "Feed-forward expansion");
  sub->add_option("--dropout", args->dropout, "Residual dropout");
  sub->add_option("--seed", args->seed, "Run seed");
  sub->add_option("--log-every", args->log_every, "Loss curve interval");
  sub->add_option("--checkpoint-every", args->checkpoint_every,
                  "Resumable checkpoint interval (0 = final only)");
  sub->add_flag("--resume", args->resume,
                "Continue from model.ckpt in --out if present");

  return [args, sub]() {
    if (!sub->parsed()) return;
    const TrainArgs& a = *args;
    ModelConfig mc =
        a.preset == "full" ? ModelConfig::FullSudoku() : ModelConfig::Desk();
    mc.seq_len = sudoku::kCells;
    mc.vocab = sudoku::Vocab();
    Apply(a.layers, mc.layers);
    Apply(a.hidden, mc.hidden);
    Apply(a.heads, mc.heads);
    Apply(a.mlp_ratio, mc.mlp_ratio);
    Apply(a.dropout, mc.dropout);
    TrainConfig tc = a.preset == "full" ? TrainConfig::Full() : TrainConfig::Desk();
    if (a.objective) tc.objective = ParseObjective(*a.objective);
    Apply(a.alpha, tc.mixture.alpha);
    Apply(a.lambda_noise, tc.mixture.lambda_noise);
    Apply(a.mask_lo, tc.mixture.mask_ratio_law.lo);
    Apply(a.mask_hi, tc.mixture.mask_ratio_law.hi);
    Apply(a.sample_alpha, tc.mixture.sample_alpha);
    Apply(a.alpha_max, tc.mixture.alpha_max);
    Apply(a.steps, tc.steps);
    Apply(a.batch_size, tc.batch_size);
    Apply(a.lr, tc.learning_rate);
    Apply(a.weight_decay, tc.weight_decay);
    if (a.schedule) tc.schedule = ParseLrSchedule(*a.schedule);
    Apply(a.warmup, tc.warmup_steps);
    Apply(a.grad_clip, tc.grad_clip);
    tc.seed = a.seed;
    tc.log_every = a.log_every;
    try {
      mc.Validate();
      tc.Validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (a.checkpoint_every < 0) throw UsageError("--checkpoint-every must be >= 0");

    nlohmann::json config = {{"data", a.data},
                             {"preset", a.preset},
                             {"model", mc.ToJson()},
                             {"train", tc.ToJson()},
                             {"checkpoint_every", a.checkpoint_every}};
    RunManifest manifest(a.out, "train", config);
    const std::string ckpt_path = manifest.Path("model.ckpt");
    const std::string csv_path = manifest.Path("loss.csv");

    Transformer<float> model(mc);
    AdamWState opt;
    std::vector<LossRow> curve;
    if (a.resume && std::filesystem::exists(ckpt_path)) {
      Checkpoint ck = LoadCheckpoint(ckpt_path);
      if (!(ck.config == mc) || !ck.has_optimizer ||
          ck.metadata.value("train", nlohmann::json()) != tc.ToJson()) {
        throw UsageError("existing checkpoint does not match this configuration");
      }
      model = ModelFromCheckpoint(ck);
      opt = std::move(ck.optimizer);
      for (const auto& r : ck.metadata.value("loss_curve", nlohmann::json::array())) {
        curve.push_back({r.at(0).get<std::int64_t>(), r.at(1).get<double>(),
                         r.at(2).get<double>(), r.at(3).get<double>()});
      }
      std::cerr << "resuming at step " << opt.step << '\n';
    } else {
      InitForTraining(model, tc);
    }

    RunRecorded(manifest, [&] {
      const std::vector<sudoku::Board> boards = sudoku::ReadBoards(a.data);
      for (const sudoku::Board& b : boards) {
        if (!sudoku::IsSolution(b)) {
          throw std::invalid_argument("training file holds a non-solution board");
        }
      }
      manifest.Set("n_train_boards", boards.size());
      auto save = [&](bool with_optimizer) {
        nlohmann::json meta = {{"train", tc.ToJson()}, {"data", a.data}};
        nlohmann::json rows = nlohmann::json::array();
        for (const LossRow& r : curve) {
          rows.push_back({r.step, r.masked_term, r.noise_term, r.total});
        }
        meta["loss_curve"] = rows;
        SaveCheckpoint(ckpt_path, model, with_optimizer ? &opt : nullptr,
                       opt.step, meta);
      };
      TrainHooks hooks;
      hooks.dump_dir = a.out;
      hooks.on_log = [&](const LossRow& r) {
        curve.push_back(r);
        std::cerr << "step " << r.step << " masked " << r.masked_term
                  << " noise " << r.noise_term << " total " << r.total << '\n';
      };
      hooks.after_step = [&](std::int64_t step) {
        if (a.checkpoint_every > 0 && step % a.checkpoint_every == 0 &&
            step < tc.steps) {
          save(true);
          WriteLossCsv(csv_path, curve);
        }
      };
      Train(model, opt, boards, tc, hooks);
      save(true);
      WriteLossCsv(csv_path, curve);
      manifest.AddOutput("checkpoint", ckpt_path);
      manifest.AddOutput("loss_curve", csv_path);
      manifest.Set("final_step", opt.step);
    });
  };
}

}  // namespace cdlm::cli
