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

// AVX-512F GEMM. Only the matrix multiply gets a 512-bit tile; the
// bandwidth-bound elementwise kernels reuse the AVX2 versions.

#include <immintrin.h>

#include <cstddef>

#include "cdlm/simd/kernels.h"

#define CDLM_GEMM_DRIVER_NAMESPACE cdlm_avx512_gemm
#include "gemm_driver.h"

namespace cdlm::simd::internal {
namespace {

using cdlm_avx512_gemm::BlockedGemm;
using cdlm_avx512_gemm::MergeTile;

constexpr int kMr = 12;
constexpr int kNr = 32;

void Micro12x32(int kc, const float* ap, const float* bp, float* c, int ldc,
                float alpha, float beta, int rows, int cols) {
  __m512 acc[kMr][2];
  for (int r = 0; r < kMr; ++r) {
    acc[r][0] = _mm512_setzero_ps();
    acc[r][1] = _mm512_setzero_ps();
  }
  for (int p = 0; p < kc; ++p) {
    const __m512 b0 = _mm512_load_ps(bp);
    const __m512 b1 = _mm512_load_ps(bp + 16);
    for (int r = 0; r < kMr; ++r) {
      const __m512 av = _mm512_set1_ps(ap[r]);
      acc[r][0] = _mm512_fmadd_ps(av, b0, acc[r][0]);
      acc[r][1] = _mm512_fmadd_ps(av, b1, acc[r][1]);
    }
    ap += kMr;
    bp += kNr;
  }
  if (rows == kMr && cols == kNr) {
    const __m512 va = _mm512_set1_ps(alpha);
    const __m512 vb = _mm512_set1_ps(beta);
    for (int r = 0; r < kMr; ++r) {
      float* row = c + static_cast<std::ptrdiff_t>(r) * ldc;
      __m512 o0 = _mm512_mul_ps(va, acc[r][0]);
      __m512 o1 = _mm512_mul_ps(va, acc[r][1]);
      if (beta != 0.0f) {
        o0 = _mm512_fmadd_ps(vb, _mm512_loadu_ps(row), o0);
        o1 = _mm512_fmadd_ps(vb, _mm512_loadu_ps(row + 16), o1);
      }
      _mm512_storeu_ps(row, o0);
      _mm512_storeu_ps(row + 16, o1);
    }
    return;
  }
  alignas(64) float tile[kMr][kNr];
  for (int r = 0; r < kMr; ++r) {
    _mm512_store_ps(tile[r], acc[r][0]);
    _mm512_store_ps(tile[r] + 16, acc[r][1]);
  }
  MergeTile<kMr, kNr>(tile, c, ldc, alpha, beta, rows, cols);
}

void Gemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
          const float* a, int lda, const float* b, int ldb, float beta,
          float* c, int ldc) {
  BlockedGemm<kMr, kNr>(trans_a, trans_b, m, n, k, alpha, a, lda, b, ldb, beta,
                        c, ldc, Micro12x32);
}

}  // namespace

const KernelTable& Avx512Table() {
  static const KernelTable table = [] {
    KernelTable t = Avx2Table();
    t.isa = Isa::kAvx512;
    t.gemm = Gemm;
    return t;
  }();
  return table;
}

}  // namespace cdlm::simd::internal
