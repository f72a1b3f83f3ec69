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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "cdlm/simd/kernels.h"
#include "cdlm/simd/reference.h"

namespace cdlm::simd {

namespace internal {

namespace {

void ScalarGemm(bool ta, bool tb, int m, int n, int k, float alpha,
                const float* a, int lda, const float* b, int ldb, float beta,
                float* c, int ldc) {
  reference::Gemm<float>(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

void ScalarSoftmax(float* x, int rows, int cols, int ld, float scale) {
  reference::SoftmaxRows<float>(x, rows, cols, ld, scale);
}

void ScalarGeluForward(const float* x, float* y, std::size_t n) {
  reference::GeluForward<float>(x, y, n);
}

void ScalarGeluBackward(const float* x, const float* dy, float* dx,
                        std::size_t n) {
  reference::GeluBackward<float>(x, dy, dx, n);
}

void ScalarAdamW(float* p, const float* g, float* m, float* v, std::size_t n,
                 const AdamWStep& s) {
  reference::AdamWUpdate<float>(p, g, m, v, n, s);
}

float ScalarDot(const float* x, const float* y, std::size_t n) {
  return reference::Dot<float>(x, y, n);
}

void ScalarAxpy(float a, const float* x, float* y, std::size_t n) {
  reference::Axpy<float>(a, x, y, n);
}

}  // namespace

const KernelTable& ScalarTable() {
  static const KernelTable table{Isa::kScalar,      ScalarGemm,
                                 ScalarSoftmax,     ScalarGeluForward,
                                 ScalarGeluBackward, ScalarAdamW,
                                 ScalarDot,         ScalarAxpy};
  return table;
}

}  // namespace internal

namespace {

std::atomic<const KernelTable*> g_active{nullptr};

const KernelTable* Resolve() {
  if (const char* env = std::getenv("CDLM_SIMD"); env != nullptr && *env) {
    return &KernelsFor(ParseIsa(env));
  }
  return &KernelsFor(BestIsa());
}

}  // namespace

std::string_view IsaName(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kAvx512:
      return "avx512";
  }
  return "unknown";
}

Isa ParseIsa(std::string_view name) {
  if (name == "scalar") return Isa::kScalar;
  if (name == "avx2") return Isa::kAvx2;
  if (name == "avx512") return Isa::kAvx512;
  throw std::invalid_argument("unknown SIMD level '" + std::string(name) +
                              "' (expected scalar, avx2 or avx512)");
}

bool IsaSupported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
#if defined(CDLM_HAVE_X86_SIMD)
    case Isa::kAvx2:
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    case Isa::kAvx512:
      return __builtin_cpu_supports("avx512f") &&
             __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    default:
      return false;
#endif
  }
  return false;
}

Isa BestIsa() {
  if (IsaSupported(Isa::kAvx512)) return Isa::kAvx512;
  if (IsaSupported(Isa::kAvx2)) return Isa::kAvx2;
  return Isa::kScalar;
}

const KernelTable& KernelsFor(Isa isa) {
  if (!IsaSupported(isa)) {
    throw std::invalid_argument("SIMD level " + std::string(IsaName(isa)) +
                                " is not supported on this host");
  }
  switch (isa) {
#if defined(CDLM_HAVE_X86_SIMD)
    case Isa::kAvx2:
      return internal::Avx2Table();
    case Isa::kAvx512:
      return internal::Avx512Table();
#endif
    default:
      return internal::ScalarTable();
  }
}

const KernelTable& Kernels() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    t = Resolve();
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

void ForceIsa(Isa isa) {
  g_active.store(&KernelsFor(isa), std::memory_order_release);
}

}  // namespace cdlm::simd
