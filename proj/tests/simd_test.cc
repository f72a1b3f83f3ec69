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

#include "cdlm/simd/kernels.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cdlm/rng.h"
#include "gtest/gtest.h"

namespace cdlm::simd {
namespace {

std::vector<float> RandomVec(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<float> v(n);
  for (float& x : v) x = static_cast<float>(rng.Uniform(-scale, scale));
  return v;
}

std::vector<Isa> SupportedIsas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kAvx512}) {
    if (IsaSupported(isa)) out.push_back(isa);
  }
  return out;
}

// Naive double-precision oracle for sgemm semantics.
void OracleGemm(bool ta, bool tb, int m, int n, int k, double alpha,
                const std::vector<float>& a, int lda, const std::vector<float>& b,
                int ldb, double beta, std::vector<double>& c, int ldc) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int p = 0; p < k; ++p) {
        const double av = ta ? a[p * lda + i] : a[i * lda + p];
        const double bv = tb ? b[j * ldb + p] : b[p * ldb + j];
        acc += av * bv;
      }
      const double prior = beta == 0.0 ? 0.0 : beta * c[i * ldc + j];
      c[i * ldc + j] = alpha * acc + prior;
    }
  }
}

double OracleGelu(double x) {
  const double c = std::sqrt(2.0 / M_PI);
  return 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
}

double OracleGeluGrad(double x) {
  const double h = 1e-5;
  return (OracleGelu(x + h) - OracleGelu(x - h)) / (2.0 * h);
}

class KernelEquivalenceTest : public ::testing::TestWithParam<Isa> {};

TEST_P(KernelEquivalenceTest, GemmMatchesOracleForAllTransposes) {
  const KernelTable& kt = KernelsFor(GetParam());
  Rng rng(17);
  const int shapes[][3] = {{1, 1, 1},   {3, 5, 7},   {16, 16, 16}, {17, 33, 9},
                           {64, 31, 65}, {5, 129, 40}, {81, 384, 128}};
  for (const auto& s : shapes) {
    const int m = s[0], n = s[1], k = s[2];
    for (int ta = 0; ta < 2; ++ta) {
      for (int tb = 0; tb < 2; ++tb) {
        for (double beta : {0.0, 1.0, 0.5}) {
          const int lda = (ta ? m : k) + 3;
          const int ldb = (tb ? k : n) + 1;
          const int ldc = n + 2;
          const auto a = RandomVec(static_cast<std::size_t>(ta ? k : m) * lda, rng);
          const auto b = RandomVec(static_cast<std::size_t>(tb ? n : k) * ldb, rng);
          std::vector<float> c = RandomVec(static_cast<std::size_t>(m) * ldc, rng);
          if (beta == 0.0) {
            for (float& x : c) x = std::nanf("");
          }
          std::vector<double> expect(c.begin(), c.end());
          const float alpha = 0.75f;
          OracleGemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, expect, ldc);
          kt.gemm(ta, tb, m, n, k, alpha, a.data(), lda, b.data(), ldb,
                  static_cast<float>(beta), c.data(), ldc);
          const double tol = 1e-5 * (1.0 + std::sqrt(static_cast<double>(k)));
          for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) {
              ASSERT_NEAR(c[i * ldc + j], expect[i * ldc + j], tol)
                  << "m=" << m << " n=" << n << " k=" << k << " ta=" << ta
                  << " tb=" << tb << " beta=" << beta;
            }
          }
        }
      }
    }
  }
}

TEST_P(KernelEquivalenceTest, GemmAgreesWithScalarTable) {
  const KernelTable& kt = KernelsFor(GetParam());
  const KernelTable& ref = internal::ScalarTable();
  Rng rng(23);
  const int m = 37, n = 53, k = 71;
  const auto a = RandomVec(static_cast<std::size_t>(m) * k, rng);
  const auto b = RandomVec(static_cast<std::size_t>(k) * n, rng);
  std::vector<float> c1(static_cast<std::size_t>(m) * n, 0.0f);
  std::vector<float> c2 = c1;
  kt.gemm(false, false, m, n, k, 1.0f, a.data(), k, b.data(), n, 0.0f,
          c1.data(), n);
  ref.gemm(false, false, m, n, k, 1.0f, a.data(), k, b.data(), n, 0.0f,
           c2.data(), n);
  for (std::size_t i = 0; i < c1.size(); ++i) EXPECT_NEAR(c1[i], c2[i], 1e-4);
}

TEST_P(KernelEquivalenceTest, SoftmaxRowsMatchesOracle) {
  const KernelTable& kt = KernelsFor(GetParam());
  Rng rng(31);
  for (int cols : {1, 2, 7, 10, 16, 33, 81, 200}) {
    const int rows = 5;
    const int ld = cols + 4;
    auto x = RandomVec(static_cast<std::size_t>(rows) * ld, rng, 20.0);
    const auto orig = x;
    const float scale = 0.37f;
    kt.softmax_rows(x.data(), rows, cols, ld, scale);
    for (int r = 0; r < rows; ++r) {
      double mx = -1e300;
      for (int j = 0; j < cols; ++j) mx = std::max(mx, scale * double(orig[r * ld + j]));
      double z = 0.0;
      for (int j = 0; j < cols; ++j) z += std::exp(scale * double(orig[r * ld + j]) - mx);
      double sum = 0.0;
      for (int j = 0; j < cols; ++j) {
        const double p = std::exp(scale * double(orig[r * ld + j]) - mx) / z;
        ASSERT_NEAR(x[r * ld + j], p, 1e-6) << "cols=" << cols;
        sum += x[r * ld + j];
      }
      EXPECT_NEAR(sum, 1.0, 1e-5);
      for (int j = cols; j < ld; ++j) EXPECT_EQ(x[r * ld + j], orig[r * ld + j]);
    }
  }
}

TEST_P(KernelEquivalenceTest, SoftmaxHandlesLargeLogits) {
  const KernelTable& kt = KernelsFor(GetParam());
  std::vector<float> x = {1000.0f, 1000.0f, -1000.0f, 0.0f};
  kt.softmax_rows(x.data(), 1, 4, 4, 1.0f);
  EXPECT_NEAR(x[0], 0.5, 1e-6);
  EXPECT_NEAR(x[1], 0.5, 1e-6);
  EXPECT_NEAR(x[2], 0.0, 1e-12);
  EXPECT_NEAR(x[3], 0.0, 1e-12);
}

TEST_P(KernelEquivalenceTest, GeluForwardBackwardMatchOracle) {
  const KernelTable& kt = KernelsFor(GetParam());
  Rng rng(41);
  for (std::size_t n : {1u, 7u, 8u, 15u, 16u, 33u, 1000u}) {
    const auto x = RandomVec(n, rng, 6.0);
    const auto dy = RandomVec(n, rng);
    std::vector<float> y(n), dx(n);
    kt.gelu_forward(x.data(), y.data(), n);
    kt.gelu_backward(x.data(), dy.data(), dx.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_NEAR(y[i], OracleGelu(x[i]), 2e-6 * (1.0 + std::fabs(x[i])));
      ASSERT_NEAR(dx[i], dy[i] * OracleGeluGrad(x[i]), 2e-5);
    }
  }
}

TEST_P(KernelEquivalenceTest, AdamWMatchesOracle) {
  const KernelTable& kt = KernelsFor(GetParam());
  Rng rng(53);
  for (std::size_t n : {1u, 9u, 16u, 100u, 1031u}) {
    auto p = RandomVec(n, rng);
    const auto g = RandomVec(n, rng);
    auto m = RandomVec(n, rng, 0.1);
    auto v = RandomVec(n, rng, 0.1);
    for (float& x : v) x = std::fabs(x);
    const auto p0 = p, m0 = m, v0 = v;
    AdamWStep step;
    step.lr = 3e-3f;
    step.weight_decay = 0.1f;
    step.bias_correction1 = 1.0f - std::pow(0.9f, 5.0f);
    step.bias_correction2 = 1.0f - std::pow(0.999f, 5.0f);
    kt.adamw_update(p.data(), g.data(), m.data(), v.data(), n, step);
    for (std::size_t i = 0; i < n; ++i) {
      const double mi = 0.9 * m0[i] + 0.1 * g[i];
      const double vi = 0.999 * v0[i] + 0.001 * double(g[i]) * g[i];
      const double mhat = mi / step.bias_correction1;
      const double vhat = vi / step.bias_correction2;
      const double pi = p0[i] - step.lr * (mhat / (std::sqrt(vhat) + step.eps) +
                                           step.weight_decay * p0[i]);
      ASSERT_NEAR(m[i], mi, 1e-6);
      ASSERT_NEAR(v[i], vi, 1e-6);
      ASSERT_NEAR(p[i], pi, 1e-5);
    }
  }
}

TEST_P(KernelEquivalenceTest, DotAndAxpyMatchOracle) {
  const KernelTable& kt = KernelsFor(GetParam());
  Rng rng(61);
  for (std::size_t n : {0u, 1u, 5u, 8u, 16u, 17u, 64u, 1000u}) {
    const auto x = RandomVec(n, rng);
    auto y = RandomVec(n, rng);
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d += double(x[i]) * y[i];
    EXPECT_NEAR(kt.dot(x.data(), y.data(), n), d, 1e-5 * (1.0 + std::sqrt(double(n))));
    const auto y0 = y;
    kt.axpy(-1.5f, x.data(), y.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_NEAR(y[i], y0[i] - 1.5 * x[i], 1e-6);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(AllSupported, KernelEquivalenceTest,
                         ::testing::ValuesIn(SupportedIsas()),
                         [](const ::testing::TestParamInfo<Isa>& info) {
                           return std::string(IsaName(info.param));
                         });

TEST(DispatchTest, ScalarAlwaysSupported) {
  EXPECT_TRUE(IsaSupported(Isa::kScalar));
  EXPECT_EQ(KernelsFor(Isa::kScalar).isa, Isa::kScalar);
}

TEST(DispatchTest, BestIsaIsSupported) {
  EXPECT_TRUE(IsaSupported(BestIsa()));
}

TEST(DispatchTest, ParseIsaRoundTrip) {
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kAvx512}) {
    EXPECT_EQ(ParseIsa(IsaName(isa)), isa);
  }
  EXPECT_THROW(ParseIsa("sse9"), std::invalid_argument);
}

TEST(DispatchTest, ForceIsaSwitchesActiveTable) {
  const Isa before = Kernels().isa;
  ForceIsa(Isa::kScalar);
  EXPECT_EQ(Kernels().isa, Isa::kScalar);
  ForceIsa(before);
  EXPECT_EQ(Kernels().isa, before);
}

TEST(DispatchTest, UnsupportedIsaThrows) {
  for (Isa isa : {Isa::kAvx2, Isa::kAvx512}) {
    if (!IsaSupported(isa)) {
      EXPECT_THROW(KernelsFor(isa), std::invalid_argument);
    }
  }
}

}  // namespace
}  // namespace cdlm::simd
