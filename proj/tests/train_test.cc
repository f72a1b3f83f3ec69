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
#include <limits>
#include <numbers>
#include <vector>

#include <nlohmann/json.hpp>

#include "gtest/gtest.h"

namespace cdlm {
namespace {

namespace fs = std::filesystem;

ModelConfig TinyModel() {
  ModelConfig c;
  c.layers = 1;
  c.hidden = 16;
  c.heads = 2;
  c.mlp_ratio = 2;
  c.seq_len = 8;
  c.vocab = Vocabulary(5, 0);
  return c;
}

TrainConfig TinyTrain() {
  TrainConfig t;
  t.batch_size = 8;
  t.steps = 40;
  t.learning_rate = 3e-3;
  t.log_every = 10;
  t.seed = 11;
  t.mixture.alpha = 0.1;
  t.mixture.mask_ratio_law = {0.2, 0.8};
  return t;
}

// Constant sequences: every position carries the same symbol, so any visible
// position reveals the masked ones.
std::vector<TokenSequence> ConstantData(const ModelConfig& mc) {
  std::vector<TokenSequence> data;
  for (Token t = 1; t < mc.vocab.size(); ++t) {
    data.emplace_back(std::vector<Token>(static_cast<std::size_t>(mc.seq_len), t),
                      mc.vocab);
  }
  return data;
}

fs::path TempDir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  fs::path p = fs::temp_directory_path() /
               (std::string("cdlm_train_") + info->name());
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(LrScheduleTest, ConstantIgnoresStep) {
  TrainConfig c;
  c.learning_rate = 1e-4;
  for (std::int64_t s : {0, 1, 1000, 199999}) EXPECT_EQ(c.LearningRateAt(s), 1e-4);
}

TEST(LrScheduleTest, WarmupCosineShape) {
  TrainConfig c = TrainConfig::Desk();
  const double peak = c.learning_rate;
  EXPECT_DOUBLE_EQ(c.LearningRateAt(0), peak / c.warmup_steps);
  EXPECT_DOUBLE_EQ(c.LearningRateAt(c.warmup_steps - 1), peak);
  EXPECT_DOUBLE_EQ(c.LearningRateAt(c.warmup_steps), peak);
  const std::int64_t mid = c.warmup_steps + (c.steps - c.warmup_steps) / 2;
  EXPECT_NEAR(c.LearningRateAt(mid), peak * (c.min_lr_ratio + (1 - c.min_lr_ratio) * 0.5),
              1e-12);
  EXPECT_NEAR(c.LearningRateAt(c.steps), peak * c.min_lr_ratio, 1e-15);
  EXPECT_NEAR(c.LearningRateAt(c.steps + 100), peak * c.min_lr_ratio, 1e-15);
  double prev = c.LearningRateAt(c.warmup_steps);
  for (std::int64_t s = c.warmup_steps + 1; s <= c.steps; s += 97) {
    const double lr = c.LearningRateAt(s);
    EXPECT_LE(lr, prev);
    prev = lr;
  }
}

TEST(TrainConfigTest, PresetsAndJsonRoundTrip) {
  const TrainConfig full = TrainConfig::Full();
  EXPECT_EQ(full.batch_size, 64);
  EXPECT_EQ(full.steps, 200000);
  EXPECT_DOUBLE_EQ(full.learning_rate, 1e-4);
  EXPECT_DOUBLE_EQ(full.mixture.alpha, 0.1);
  EXPECT_DOUBLE_EQ(full.mixture.lambda_noise, 1.0);
  const TrainConfig desk = TrainConfig::Desk();
  EXPECT_GE(desk.steps, 20000);
  EXPECT_DOUBLE_EQ(desk.mixture.alpha, 0.1);
  const TrainConfig back = TrainConfig::FromJson(desk.ToJson());
  EXPECT_EQ(back.ToJson(), desk.ToJson());
}

TEST(TrainConfigTest, ValidateRejectsBadValues) {
  TrainConfig c;
  c.batch_size = 0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = TrainConfig();
  c.learning_rate = 0.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  EXPECT_THROW(ParseObjective("bogus"), std::invalid_argument);
  EXPECT_THROW(ParseLrSchedule("bogus"), std::invalid_argument);
  EXPECT_EQ(ParseObjective(ObjectiveName(Objective::kMixture)), Objective::kMixture);
}

TEST(BatchIndicesTest, DeterministicAndInRange) {
  TrainConfig c = TinyTrain();
  const auto a = BatchIndices(c, 5, 17);
  EXPECT_EQ(a, BatchIndices(c, 5, 17));
  EXPECT_NE(a, BatchIndices(c, 6, 17));
  for (std::size_t i : a) EXPECT_LT(i, 17u);
  EXPECT_THROW(BatchIndices(c, 0, 0), std::invalid_argument);
}

TEST(CorruptForTrainingTest, AbsorbingNeverReplaces) {
  const ModelConfig mc = TinyModel();
  TrainConfig c = TinyTrain();
  c.objective = Objective::kAbsorbing;
  c.mixture.alpha = 0.5;
  const auto data = ConstantData(mc);
  for (int s = 0; s < 50; ++s) {
    const CorruptionOutcome out = CorruptForTraining(data[0], c, s, 0);
    EXPECT_TRUE(out.replaced_set.empty());
    EXPECT_FALSE(out.masked_set.empty());
  }
}

TEST(TrainTest, LossDecreasesOnLearnableData) {
  const ModelConfig mc = TinyModel();
  TrainConfig c = TinyTrain();
  c.objective = Objective::kAbsorbing;
  c.steps = 600;
  c.log_every = 50;
  Transformer<float> model(mc);
  InitForTraining(model, c);
  AdamWState opt;
  const auto curve = Train(model, opt, ConstantData(mc), c);
  ASSERT_EQ(curve.size(), 12u);
  EXPECT_EQ(curve.back().step, 600);
  EXPECT_EQ(opt.step, 600);
  // Only fully masked sequences stay unpredictable: E[lambda^8] * ln 4 ~ 0.035.
  double late = 0.0;
  for (std::size_t i = 6; i < curve.size(); ++i) late += curve[i].masked_term;
  late /= static_cast<double>(curve.size() - 6);
  EXPECT_LT(late, 0.1);
  EXPECT_LT(late, 0.1 * curve.front().masked_term);
}

TEST(TrainTest, AlphaZeroMixtureIsBitIdenticalToAbsorbing) {
  const ModelConfig mc = TinyModel();
  TrainConfig abs = TinyTrain();
  abs.objective = Objective::kAbsorbing;
  TrainConfig mix = abs;
  mix.objective = Objective::kMixture;
  mix.mixture.alpha = 0.0;
  const auto data = ConstantData(mc);
  Transformer<float> a(mc), b(mc);
  InitForTraining(a, abs);
  InitForTraining(b, mix);
  AdamWState oa, ob;
  const auto ca = Train(a, oa, data, abs);
  const auto cb = Train(b, ob, data, mix);
  ASSERT_EQ(ca.size(), cb.size());
  for (std::size_t i = 0; i < ca.size(); ++i) {
    EXPECT_EQ(ca[i].total, cb[i].total);
    EXPECT_EQ(cb[i].noise_term, 0.0);
  }
  EXPECT_TRUE(std::equal(a.params().begin(), a.params().end(), b.params().begin()));
}

TEST(TrainTest, ResumingMatchesUninterruptedRun) {
  const ModelConfig mc = TinyModel();
  TrainConfig full = TinyTrain();
  const auto data = ConstantData(mc);
  Transformer<float> a(mc), b(mc);
  InitForTraining(a, full);
  InitForTraining(b, full);
  AdamWState oa, ob;
  Train(a, oa, data, full);
  TrainConfig half = full;
  half.steps = 20;
  Train(b, ob, data, half);
  Train(b, ob, data, full);
  EXPECT_EQ(ob.step, full.steps);
  EXPECT_TRUE(std::equal(a.params().begin(), a.params().end(), b.params().begin()));
  EXPECT_EQ(oa.m, ob.m);
  EXPECT_EQ(oa.v, ob.v);
}

TEST(TrainTest, MixtureReportsNoiseTerm) {
  const ModelConfig mc = TinyModel();
  TrainConfig c = TinyTrain();
  c.mixture.alpha = 0.5;
  Transformer<float> model(mc);
  InitForTraining(model, c);
  AdamWState opt;
  const auto curve = Train(model, opt, ConstantData(mc), c);
  for (const LossRow& r : curve) {
    EXPECT_GT(r.noise_term, 0.0);
    EXPECT_NEAR(r.total, r.masked_term + r.noise_term, 1e-9);
  }
}

TEST(TrainTest, NonFiniteParametersHaltWithBatchDump) {
  const ModelConfig mc = TinyModel();
  TrainConfig c = TinyTrain();
  Transformer<float> model(mc);
  InitForTraining(model, c);
  for (float& p : model.tensor_data("tok_emb")) {
    p = std::numeric_limits<float>::quiet_NaN();
  }
  AdamWState opt;
  TrainHooks hooks;
  hooks.dump_dir = TempDir().string();
  try {
    Train(model, opt, ConstantData(mc), c, hooks);
    FAIL() << "training did not halt";
  } catch (const TrainingHaltedError& e) {
    ASSERT_TRUE(fs::exists(e.dump_path()));
    std::ifstream in(e.dump_path());
    const nlohmann::json j = nlohmann::json::parse(in);
    EXPECT_EQ(j.at("step").get<int>(), 0);
    EXPECT_EQ(j.at("clean").size(), static_cast<std::size_t>(c.batch_size));
    EXPECT_EQ(j.at("corrupted").size(), static_cast<std::size_t>(c.batch_size));
  }
  EXPECT_EQ(opt.step, 0);
}

TEST(TrainTest, RejectsMismatchedData) {
  const ModelConfig mc = TinyModel();
  Transformer<float> model(mc);
  AdamWState opt;
  std::vector<TokenSequence> bad = {TokenSequence({1, 2, 3}, mc.vocab)};
  EXPECT_THROW(Train(model, opt, bad, TinyTrain()), std::invalid_argument);
}

TEST(TrainTest, LossCsvHasHeaderAndRows) {
  const fs::path dir = TempDir();
  WriteLossCsv((dir / "loss.csv").string(), {{100, 1.5, 0.5, 2.0}, {200, 1.0, 0.25, 1.25}});
  std::ifstream in(dir / "loss.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,masked_term,noise_term,total");
  std::getline(in, line);
  EXPECT_EQ(line, "100,1.5,0.5,2");
}

}  // namespace
}  // namespace cdlm
