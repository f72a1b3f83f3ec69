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

#include "cdlm/objective.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cdlm/corruption.h"
#include "gtest/gtest.h"

namespace cdlm {
namespace {

const Vocabulary kVocab4(4, 0);

CorruptionOutcome MakeOutcome(const TokenSequence& clean, PositionSet m,
                              PositionSet n, std::vector<Token> replacements) {
  CorruptionOutcome out{clean, m, n, 0.0, {}};
  for (int i : m) {
    out.corrupted.Set(i, clean.vocab().mask_id());
    out.originals.emplace(i, clean[i]);
  }
  for (std::size_t j = 0; j < n.size(); ++j) {
    out.corrupted.Set(n[j], replacements[j]);
    out.originals.emplace(n[j], clean[n[j]]);
  }
  out.CheckInvariants(clean);
  return out;
}

// log-sum-exp oracle written independently of the library helpers.
double OracleNll(const std::vector<double>& row, int target) {
  double z = 0.0;
  for (double v : row) z += std::exp(v);
  return std::log(z) - row[static_cast<std::size_t>(target)];
}

TEST(MixtureLossTest, UniformLogitsGiveTwoLogFour) {
  const TokenSequence clean({1, 2, 3, 1}, kVocab4);
  const CorruptionOutcome out = MakeOutcome(clean, {0, 2}, {1}, {3});
  const std::vector<float> logits(16, 0.0f);
  const LossBreakdown b = MixtureLoss<float>(logits, 4, clean, out, 1.0);
  EXPECT_NEAR(b.masked_term, std::log(4.0), 1e-6);
  EXPECT_NEAR(b.noise_term, std::log(4.0), 1e-6);
  EXPECT_NEAR(b.total, 2.0 * std::log(4.0), 1e-6);
  EXPECT_EQ(b.masked_count, 2);
  EXPECT_EQ(b.noise_count, 1);
}

TEST(MixtureLossTest, HandComputedFixtures) {
  const TokenSequence clean({1, 2, 3}, kVocab4);
  const CorruptionOutcome out = MakeOutcome(clean, {0}, {2}, {1});
  const std::vector<double> r0 = {0.0, 2.0, 0.0, 0.0};
  const std::vector<double> r1 = {5.0, 5.0, 5.0, 5.0};
  const std::vector<double> r2 = {0.0, 1.0, -1.0, 3.0};
  std::vector<double> logits;
  for (const auto* r : {&r0, &r1, &r2}) logits.insert(logits.end(), r->begin(), r->end());
  const double m = std::log(std::exp(2.0) + 3.0) - 2.0;
  const double n = std::log(1.0 + std::exp(1.0) + std::exp(-1.0) + std::exp(3.0)) - 3.0;
  for (double lambda : {0.0, 0.5, 1.0, 2.0}) {
    const LossBreakdown b = MixtureLoss<double>(logits, 4, clean, out, lambda);
    EXPECT_NEAR(b.masked_term, m, 1e-12);
    EXPECT_NEAR(b.noise_term, n, 1e-12);
    EXPECT_NEAR(b.total, m + lambda * n, 1e-12);
  }
  EXPECT_NEAR(m, OracleNll(r0, 1), 1e-12);
  EXPECT_NEAR(n, OracleNll(r2, 3), 1e-12);
}

TEST(MixtureLossTest, AveragesWithinEachSet) {
  const TokenSequence clean({1, 1, 2, 2, 3}, kVocab4);
  const CorruptionOutcome out = MakeOutcome(clean, {0, 1, 2}, {3, 4}, {1, 1});
  std::vector<double> logits(20, 0.0);
  logits[0 * 4 + 1] = 1.0;
  logits[1 * 4 + 1] = 2.0;
  logits[2 * 4 + 2] = -1.0;
  logits[3 * 4 + 2] = 4.0;
  logits[4 * 4 + 0] = 1.0;
  auto row = [&](int i) {
    return std::vector<double>(logits.begin() + i * 4, logits.begin() + i * 4 + 4);
  };
  const double m = (OracleNll(row(0), 1) + OracleNll(row(1), 1) + OracleNll(row(2), 2)) / 3.0;
  const double n = (OracleNll(row(3), 2) + OracleNll(row(4), 3)) / 2.0;
  const LossBreakdown b = MixtureLoss<double>(logits, 4, clean, out, 1.0);
  EXPECT_NEAR(b.masked_term, m, 1e-12);
  EXPECT_NEAR(b.noise_term, n, 1e-12);
}

TEST(MixtureLossTest, LambdaZeroAndEmptyNoiseSetAreBitIdenticalToMasked) {
  Rng rng(3);
  const TokenSequence clean({1, 2, 3, 1, 2, 3}, kVocab4);
  std::vector<float> logits(24);
  for (float& v : logits) v = static_cast<float>(rng.Normal());
  const CorruptionOutcome with_n = MakeOutcome(clean, {1, 4}, {0, 5}, {2, 1});
  const CorruptionOutcome without_n = MakeOutcome(clean, {1, 4}, {}, {});
  const double masked = MaskedCeLoss<float>(logits, 4, clean, {1, 4});
  const LossBreakdown a = MixtureLoss<float>(logits, 4, clean, with_n, 0.0);
  const LossBreakdown b = MixtureLoss<float>(logits, 4, clean, without_n, 1.0);
  EXPECT_EQ(a.total, masked);
  EXPECT_EQ(b.total, masked);
  EXPECT_EQ(b.noise_term, 0.0);

  std::vector<float> ga(24, 0.0f), gb(24, 0.0f), gc(24, 0.0f);
  MixtureLossWithGrad<float>(logits, 4, clean, with_n, 0.0, 1.0, ga);
  MixtureLossWithGrad<float>(logits, 4, clean, without_n, 1.0, 1.0, gb);
  MixtureLossWithGrad<float>(logits, 4, clean, without_n, 0.0, 1.0, gc);
  EXPECT_EQ(ga, gb);
  EXPECT_EQ(gb, gc);
}

TEST(MixtureLossTest, EmptyMaskedSetThrows) {
  const TokenSequence clean({1, 2}, kVocab4);
  const std::vector<float> logits(8, 0.0f);
  EXPECT_THROW(MaskedCeLoss<float>(logits, 4, clean, {}), std::invalid_argument);
  const CorruptionOutcome out = MakeOutcome(clean, {}, {1}, {3});
  EXPECT_THROW(MixtureLoss<float>(logits, 4, clean, out, 1.0), std::invalid_argument);
}

TEST(MixtureLossTest, RejectsShapeMismatchAndNegativeLambda) {
  const TokenSequence clean({1, 2}, kVocab4);
  const CorruptionOutcome out = MakeOutcome(clean, {0}, {}, {});
  const std::vector<float> short_logits(7, 0.0f);
  EXPECT_THROW(MixtureLoss<float>(short_logits, 4, clean, out, 1.0),
               std::invalid_argument);
  const std::vector<float> logits(8, 0.0f);
  EXPECT_THROW(MixtureLoss<float>(logits, 4, clean, out, -0.5), std::invalid_argument);
}

TEST(MixtureLossTest, IgnoresPositionsOutsideMAndN) {
  Rng rng(5);
  const TokenSequence clean({1, 2, 3, 1}, kVocab4);
  const CorruptionOutcome out = MakeOutcome(clean, {1}, {3}, {2});
  std::vector<double> logits(16);
  for (double& v : logits) v = rng.Normal();
  const LossBreakdown a = MixtureLoss<double>(logits, 4, clean, out, 1.0);
  for (int v = 0; v < 4; ++v) {
    logits[0 * 4 + v] += 10.0 * v;
    logits[2 * 4 + v] -= 3.0 * v;
  }
  const LossBreakdown b = MixtureLoss<double>(logits, 4, clean, out, 1.0);
  EXPECT_EQ(a.total, b.total);
}

TEST(MixtureLossTest, GradientMatchesCentralDifferences) {
  Rng rng(7);
  const Vocabulary vocab(6, 0);
  const TokenSequence clean({1, 2, 3, 4, 5, 1, 2}, vocab);
  const CorruptionOutcome out = MakeOutcome(clean, {0, 3, 6}, {1, 4}, {4, 2});
  std::vector<double> logits(7 * 6);
  for (double& v : logits) v = rng.Normal();
  for (double lambda : {0.0, 0.7, 1.0}) {
    const double scale = 0.5;
    std::vector<double> grad(logits.size(), 0.0);
    MixtureLossWithGrad<double>(logits, 6, clean, out, lambda, scale, grad);
    const double h = 1e-6;
    for (std::size_t i = 0; i < logits.size(); ++i) {
      std::vector<double> up = logits, dn = logits;
      up[i] += h;
      dn[i] -= h;
      const double fd = (MixtureLoss<double>(up, 6, clean, out, lambda).total -
                         MixtureLoss<double>(dn, 6, clean, out, lambda).total) /
                        (2.0 * h);
      ASSERT_NEAR(grad[i], scale * fd, 1e-7) << "i=" << i << " lambda=" << lambda;
    }
  }
}

TEST(MixtureLossTest, GradientAccumulates) {
  const TokenSequence clean({1, 2}, kVocab4);
  const CorruptionOutcome out = MakeOutcome(clean, {0}, {}, {});
  const std::vector<double> logits(8, 0.0);
  std::vector<double> g1(8, 0.0), g2(8, 1.0);
  MixtureLossWithGrad<double>(logits, 4, clean, out, 1.0, 1.0, g1);
  MixtureLossWithGrad<double>(logits, 4, clean, out, 1.0, 1.0, g2);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(g2[i], g1[i] + 1.0);
}

TEST(AverageBreakdownsTest, MeansTermsAndSumsCounts) {
  std::vector<LossBreakdown> items(2);
  items[0] = {1.0, 2.0, 3.0, 4, 1};
  items[1] = {3.0, 0.0, 3.0, 2, 0};
  const LossBreakdown avg = AverageBreakdowns(items);
  EXPECT_DOUBLE_EQ(avg.masked_term, 2.0);
  EXPECT_DOUBLE_EQ(avg.noise_term, 1.0);
  EXPECT_DOUBLE_EQ(avg.total, 3.0);
  EXPECT_EQ(avg.masked_count, 6);
  EXPECT_EQ(avg.noise_count, 1);
  EXPECT_EQ(AverageBreakdowns({}).total, 0.0);
}

}  // namespace
}  // namespace cdlm
