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
#include "cdlm/train.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "cdlm/simd/kernels.h"

namespace cdlm {

namespace {

constexpr std::uint64_t kDataStream = 11;
constexpr std::uint64_t kCorruptStream = 12;
constexpr std::uint64_t kDropoutStream = 13;
constexpr std::uint64_t kInitStream = 14;

nlohmann::json TokensJson(const TokenSequence& s) { return s.tokens(); }

std::string DumpBatch(const std::string& dir, std::int64_t step,
                      const std::vector<std::size_t>& indices,
                      const std::vector<TokenSequence>& clean,
                      const std::vector<CorruptionOutcome>& corrupted,
                      const std::string& error) {
  nlohmann::json j;
  j["step"] = step;
  j["error"] = error;
  j["indices"] = indices;
  j["clean"] = nlohmann::json::array();
  j["corrupted"] = nlohmann::json::array();
  for (std::size_t i = 0; i < clean.size(); ++i) {
    j["clean"].push_back(TokensJson(clean[i]));
    j["corrupted"].push_back(TokensJson(corrupted[i].corrupted));
  }
  std::filesystem::create_directories(dir);
  const std::string path =
      (std::filesystem::path(dir) / ("nan_batch_step" + std::to_string(step) + ".json"))
          .string();
  std::ofstream(path) << j.dump() << '\n';
  return path;
}

}  // namespace

std::string ObjectiveName(Objective o) {
  return o == Objective::kAbsorbing ? "absorbing" : "mixture";
}

Objective ParseObjective(const std::string& s) {
  if (s == "absorbing" || s == "mdlm") return Objective::kAbsorbing;
  if (s == "mixture" || s == "cdlm") return Objective::kMixture;
  throw std::invalid_argument("unknown objective '" + s + "'");
}

std::string LrScheduleName(LrSchedule s) {
  return s == LrSchedule::kConstant ? "constant" : "warmup-cosine";
}

LrSchedule ParseLrSchedule(const std::string& s) {
  if (s == "constant") return LrSchedule::kConstant;
  if (s == "warmup-cosine") return LrSchedule::kWarmupCosine;
  throw std::invalid_argument("unknown lr schedule '" + s + "'");
}

TrainConfig TrainConfig::Full() { return TrainConfig{}; }

TrainConfig TrainConfig::Desk() {
  TrainConfig c;
  c.batch_size = 32;
  c.steps = 20000;
  c.learning_rate = 5e-4;
  c.schedule = LrSchedule::kWarmupCosine;
  c.warmup_steps = 500;
  c.grad_clip = 1.0;
  c.mixture.alpha = 0.1;
  c.mixture.mask_ratio_law = {0.2, 0.9};
  return c;
}

void TrainConfig::Validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (!(weight_decay >= 0.0)) {
    throw std::invalid_argument("weight_decay must be nonnegative");
  }
  if (warmup_steps < 0) throw std::invalid_argument("warmup_steps must be >= 0");
  if (!(min_lr_ratio >= 0.0 && min_lr_ratio <= 1.0)) {
    throw std::invalid_argument("min_lr_ratio must lie in [0, 1]");
  }
  if (!(grad_clip >= 0.0)) throw std::invalid_argument("grad_clip must be >= 0");
  if (log_every < 1) throw std::invalid_argument("log_every must be >= 1");
  mixture.Validate();
}

double TrainConfig::LearningRateAt(std::int64_t step) const {
  if (schedule == LrSchedule::kConstant) return learning_rate;
  if (step < warmup_steps) {
    return learning_rate * static_cast<double>(step + 1) /
           static_cast<double>(warmup_steps);
  }
  const double span = static_cast<double>(std::max<std::int64_t>(1, steps - warmup_steps));
  const double progress =
      std::min(1.0, static_cast<double>(step - warmup_steps) / span);
  const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
  return learning_rate * (min_lr_ratio + (1.0 - min_lr_ratio) * cosine);
}

nlohmann::json TrainConfig::ToJson() const {
  return {{"batch_size", batch_size},
          {"steps", steps},
          {"learning_rate", learning_rate},
          {"weight_decay", weight_decay},
          {"objective", ObjectiveName(objective)},
          {"alpha", mixture.alpha},
          {"lambda_noise", mixture.lambda_noise},
          {"mask_ratio_lo", mixture.mask_ratio_law.lo},
          {"mask_ratio_hi", mixture.mask_ratio_law.hi},
          {"sample_alpha", mixture.sample_alpha},
          {"alpha_max", mixture.alpha_max},
          {"seed", seed},
          {"schedule", LrScheduleName(schedule)},
          {"warmup_steps", warmup_steps},
          {"min_lr_ratio", min_lr_ratio},
          {"grad_clip", grad_clip},
          {"beta1", beta1},
          {"beta2", beta2},
          {"adam_eps", adam_eps},
          {"log_every", log_every}};
}

TrainConfig TrainConfig::FromJson(const nlohmann::json& j) {
  TrainConfig c;
  c.batch_size = j.at("batch_size").get<int>();
  c.steps = j.at("steps").get<std::int64_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.objective = ParseObjective(j.at("objective").get<std::string>());
  c.mixture.alpha = j.at("alpha").get<double>();
  c.mixture.lambda_noise = j.at("lambda_noise").get<double>();
  c.mixture.mask_ratio_law = {j.at("mask_ratio_lo").get<double>(),
                              j.at("mask_ratio_hi").get<double>()};
  c.mixture.sample_alpha = j.at("sample_alpha").get<bool>();
  c.mixture.alpha_max = j.at("alpha_max").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.schedule = ParseLrSchedule(j.at("schedule").get<std::string>());
  c.warmup_steps = j.at("warmup_steps").get<std::int64_t>();
  c.min_lr_ratio = j.at("min_lr_ratio").get<double>();
  c.grad_clip = j.at("grad_clip").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.adam_eps = j.at("adam_eps").get<double>();
  c.log_every = j.at("log_every").get<std::int64_t>();
  c.Validate();
  return c;
}

CorruptionOutcome CorruptForTraining(const TokenSequence& clean,
                                     const TrainConfig& cfg, std::int64_t step,
                                     int index) {
  const Rng rng = Rng(cfg.seed)
                      .Split(kCorruptStream)
                      .Split(static_cast<std::uint64_t>(step))
                      .Split(static_cast<std::uint64_t>(index));
  if (cfg.objective == Objective::kAbsorbing) {
    return AbsorbWithSampledRatio(clean, cfg.mixture.mask_ratio_law, rng);
  }
  return MixtureCorrupt(clean, cfg.mixture, rng);
}

std::vector<std::size_t> BatchIndices(const TrainConfig& cfg,
                                      std::int64_t step, std::size_t n_data) {
  if (n_data == 0) throw std::invalid_argument("empty training set");
  Rng rng = Rng(cfg.seed).Split(kDataStream).Split(static_cast<std::uint64_t>(step));
  std::vector<std::size_t> idx(static_cast<std::size_t>(cfg.batch_size));
  for (std::size_t& i : idx) {
    i = rng.UniformInt(static_cast<std::uint32_t>(n_data));
  }
  return idx;
}

void InitForTraining(Transformer<float>& model, const TrainConfig& cfg) {
  model.InitParams(Rng(cfg.seed).Split(kInitStream));
}

LossBreakdown TrainStep(Transformer<float>& model, AdamWState& opt,
                        const std::vector<TokenSequence>& clean,
                        const std::vector<CorruptionOutcome>& corrupted,
                        const TrainConfig& cfg, Rng dropout_rng) {
  const ModelConfig& mc = model.config();
  const int b = static_cast<int>(clean.size());
  if (b == 0 || corrupted.size() != clean.size()) {
    throw std::invalid_argument("batch is empty or inconsistent");
  }
  const std::size_t n_params = model.num_params();
  if (opt.m.empty()) {
    opt.m.assign(n_params, 0.0f);
    opt.v.assign(n_params, 0.0f);
  }
  if (opt.m.size() != n_params || opt.v.size() != n_params) {
    throw std::invalid_argument("optimizer state does not match the model");
  }
  std::vector<Token> tokens;
  tokens.reserve(static_cast<std::size_t>(b) * mc.seq_len);
  for (const CorruptionOutcome& c : corrupted) {
    tokens.insert(tokens.end(), c.corrupted.tokens().begin(),
                  c.corrupted.tokens().end());
  }
  ForwardCache<float> cache;
  model.Forward(tokens, b, /*training=*/true, dropout_rng, cache);

  const int vocab = mc.vocab.size();
  const std::size_t per_seq = static_cast<std::size_t>(mc.seq_len) * vocab;
  std::vector<float> dlogits(cache.logits.size(), 0.0f);
  std::vector<LossBreakdown> parts;
  parts.reserve(static_cast<std::size_t>(b));
  for (int i = 0; i < b; ++i) {
    const std::size_t off = static_cast<std::size_t>(i) * per_seq;
    parts.push_back(MixtureLossWithGrad<float>(
        std::span<const float>(cache.logits.data() + off, per_seq), vocab,
        clean[static_cast<std::size_t>(i)], corrupted[static_cast<std::size_t>(i)],
        cfg.mixture.lambda_noise, 1.0 / b,
        std::span<float>(dlogits.data() + off, per_seq)));
  }

  std::vector<float> grads(n_params, 0.0f);
  model.Backward(cache, dlogits, grads);

  if (cfg.grad_clip > 0.0) {
    double sq = 0.0;
    for (float g : grads) sq += static_cast<double>(g) * g;
    const double norm = std::sqrt(sq);
    if (norm > cfg.grad_clip) {
      const float s = static_cast<float>(cfg.grad_clip / norm);
      for (float& g : grads) g *= s;
    }
  }

  const double lr = cfg.LearningRateAt(opt.step);
  const double t = static_cast<double>(opt.step + 1);
  simd::AdamWStep step;
  step.lr = static_cast<float>(lr);
  step.beta1 = static_cast<float>(cfg.beta1);
  step.beta2 = static_cast<float>(cfg.beta2);
  step.eps = static_cast<float>(cfg.adam_eps);
  step.bias_correction1 = static_cast<float>(1.0 - std::pow(cfg.beta1, t));
  step.bias_correction2 = static_cast<float>(1.0 - std::pow(cfg.beta2, t));
  const simd::KernelTable& k = simd::Kernels();
  auto params = model.params();
  for (const TensorInfo& ti : model.tensors()) {
    step.weight_decay =
        ti.weight_decay ? static_cast<float>(cfg.weight_decay) : 0.0f;
    k.adamw_update(params.data() + ti.offset, grads.data() + ti.offset,
                   opt.m.data() + ti.offset, opt.v.data() + ti.offset, ti.size,
                   step);
  }
  ++opt.step;
  return AverageBreakdowns(parts);
}

std::vector<LossRow> Train(Transformer<float>& model, AdamWState& opt,
                           const std::vector<TokenSequence>& data,
                           const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.Validate();
  for (const TokenSequence& s : data) {
    if (s.size() != model.config().seq_len || !(s.vocab() == model.config().vocab)) {
      throw std::invalid_argument("training sequence does not match the model");
    }
  }
  std::vector<LossRow> curve;
  LossRow window;
  std::int64_t in_window = 0;
  while (opt.step < cfg.steps) {
    const std::int64_t s = opt.step;
    const std::vector<std::size_t> idx = BatchIndices(cfg, s, data.size());
    std::vector<TokenSequence> clean;
    std::vector<CorruptionOutcome> corrupted;
    clean.reserve(idx.size());
    corrupted.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      clean.push_back(data[idx[i]]);
      corrupted.push_back(
          CorruptForTraining(clean.back(), cfg, s, static_cast<int>(i)));
    }
    LossBreakdown lb;
    try {
      lb = TrainStep(model, opt, clean, corrupted, cfg,
                     Rng(cfg.seed).Split(kDropoutStream).Split(static_cast<std::uint64_t>(s)));
    } catch (const NonFiniteLossError& e) {
      const std::string path = DumpBatch(hooks.dump_dir, s, idx, clean, corrupted, e.what());
      throw TrainingHaltedError("non-finite loss at step " + std::to_string(s) + ": " + e.what(), path);
    } catch (const NonFiniteActivationError& e) {
      const std::string path = DumpBatch(hooks.dump_dir, s, idx, clean, corrupted, e.what());
      throw TrainingHaltedError("non-finite activation at step " + std::to_string(s) + ": " + e.what(), path);
    }
    window.masked_term += lb.masked_term;
    window.noise_term += lb.noise_term;
    window.total += lb.total;
    ++in_window;
    if (opt.step % cfg.log_every == 0 || opt.step == cfg.steps) {
      const double n = static_cast<double>(in_window);
      LossRow row{opt.step, window.masked_term / n, window.noise_term / n,
                  window.total / n};
      curve.push_back(row);
      if (hooks.on_log) hooks.on_log(row);
      window = LossRow{};
      in_window = 0;
    }
    if (hooks.after_step) hooks.after_step(opt.step);
  }
  return curve;
}

void WriteLossCsv(const std::string& path, const std::vector<LossRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "step,masked_term,noise_term,total\n";
  out.precision(9);
  for (const LossRow& r : rows) {
    out << r.step << ',' << r.masked_term << ',' << r.noise_term << ','
        << r.total << '\n';
  }
}

}  // namespace cdlm
