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

#include "cdlm/rng.h"

#include <cmath>
#include <set>
#include <vector>

#include "binomial.h"
#include "gtest/gtest.h"

namespace cdlm {
namespace {

using Block = std::array<std::uint32_t, 4>;

TEST(PhiloxTest, KnownAnswerZero) {
  const Block out = Philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
}

TEST(PhiloxTest, KnownAnswerAllOnes) {
  const Block out = Philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                               {0xffffffff, 0xffffffff});
  EXPECT_EQ(out, (Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
}

TEST(PhiloxTest, KnownAnswerPi) {
  const Block out = Philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                               {0xa4093822, 0x299f31d0});
  EXPECT_EQ(out, (Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RngTest, SameSeedSameStream) {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.NextU64(), b.NextU64());
}

TEST(RngTest, SplitIsPureFunctionOfKeyAndId) {
  const Rng root(7);
  Rng first = root.Split(3);
  Rng consumed(7);
  for (int i = 0; i < 10; ++i) consumed.NextU32();
  Rng second = consumed.Split(3);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(first.NextU32(), second.NextU32());
}

TEST(RngTest, SplitStreamsDiffer) {
  const Rng root(1);
  std::set<std::uint64_t> firsts;
  for (std::uint64_t id = 0; id < 1000; ++id) {
    firsts.insert(root.Split(id).NextU64());
  }
  EXPECT_EQ(firsts.size(), 1000u);
  EXPECT_NE(Rng(1).NextU64(), Rng(2).NextU64());
}

TEST(RngTest, UniformInUnitInterval) {
  Rng r(5);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.Uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(RngTest, UniformHalfFrequencyWithinExactBand) {
  Rng r(9);
  const int n = 200000;
  long long below = 0;
  for (int i = 0; i < n; ++i) below += r.Uniform() < 0.5;
  EXPECT_TRUE(testing::BinomialBand(n, 0.5, 1e-6).Contains(below)) << below;
}

TEST(RngTest, UniformIntCoversRangeEvenly) {
  Rng r(11);
  const int n = 90000;
  std::vector<long long> counts(9, 0);
  for (int i = 0; i < n; ++i) {
    const std::uint32_t v = r.UniformInt(9);
    ASSERT_LT(v, 9u);
    ++counts[v];
  }
  const testing::Band band = testing::BinomialBand(n, 1.0 / 9.0, 1e-6);
  for (long long c : counts) EXPECT_TRUE(band.Contains(c)) << c;
}

TEST(RngTest, UniformIntOfOneIsZero) {
  Rng r(3);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(r.UniformInt(1), 0u);
}

TEST(RngTest, UniformRangeRespectsBounds) {
  Rng r(4);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.Uniform(0.2, 0.9);
    ASSERT_GE(u, 0.2);
    ASSERT_LT(u, 0.9);
  }
}

TEST(RngTest, NormalMomentsAreStandard) {
  Rng r(13);
  const int n = 200000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.Normal();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(var, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(RngTest, BernoulliExtremes) {
  Rng r(21);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_FALSE(r.Bernoulli(0.0));
    EXPECT_TRUE(r.Bernoulli(1.0));
  }
}

}  // namespace
}  // namespace cdlm
