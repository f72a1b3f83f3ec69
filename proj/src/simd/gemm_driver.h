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

// Cache-blocked GEMM driver shared by the SIMD translation units. Each TU
// includes this header inside its own anonymous namespace and supplies a
// register-tile micro-kernel, so code compiled for one ISA is never merged
// with another by the linker.
//
// Not a public header.

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <memory>

#ifndef CDLM_GEMM_DRIVER_NAMESPACE
#error "define CDLM_GEMM_DRIVER_NAMESPACE before including gemm_driver.h"
#endif

namespace CDLM_GEMM_DRIVER_NAMESPACE {

struct AlignedFree {
  void operator()(float* p) const { std::free(p); }
};

// Grow-only, 64-byte aligned scratch buffer.
class Scratch {
 public:
  float* Get(std::size_t n) {
    if (n > capacity_) {
      std::size_t bytes = ((n * sizeof(float) + 63) / 64) * 64;
      buf_.reset(static_cast<float*>(std::aligned_alloc(64, bytes)));
      capacity_ = n;
    }
    return buf_.get();
  }

 private:
  std::unique_ptr<float, AlignedFree> buf_;
  std::size_t capacity_ = 0;
};

inline constexpr int kKc = 256;
inline constexpr int kMc = 96;
inline constexpr int kNc = 2048;

template <int Mr>
void PackA(bool trans_a, const float* a, int lda, int i0, int mc, int p0,
           int kc, float* out) {
  for (int r = 0; r < mc; r += Mr) {
    const int rows = std::min(Mr, mc - r);
    for (int p = 0; p < kc; ++p) {
      for (int ii = 0; ii < Mr; ++ii) {
        float v = 0.0f;
        if (ii < rows) {
          const std::ptrdiff_t row = i0 + r + ii;
          const std::ptrdiff_t col = p0 + p;
          v = trans_a ? a[col * lda + row] : a[row * lda + col];
        }
        *out++ = v;
      }
    }
  }
}

template <int Nr>
void PackB(bool trans_b, const float* b, int ldb, int p0, int kc, int j0,
           int nc, float* out) {
  for (int c = 0; c < nc; c += Nr) {
    const int cols = std::min(Nr, nc - c);
    for (int p = 0; p < kc; ++p) {
      const std::ptrdiff_t row = p0 + p;
      if (!trans_b && cols == Nr) {
        const float* src = b + row * ldb + j0 + c;
        std::copy(src, src + Nr, out);
        out += Nr;
        continue;
      }
      for (int jj = 0; jj < Nr; ++jj) {
        float v = 0.0f;
        if (jj < cols) {
          const std::ptrdiff_t col = j0 + c + jj;
          v = trans_b ? b[col * ldb + row] : b[row * ldb + col];
        }
        *out++ = v;
      }
    }
  }
}

// Micro(kc, packed_a, packed_b, c, ldc, alpha, beta, rows, cols) computes one
// Mr x Nr tile; rows/cols < Mr/Nr on the ragged edges.
template <int Mr, int Nr, typename Micro>
void BlockedGemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
                 const float* a, int lda, const float* b, int ldb, float beta,
                 float* c, int ldc, Micro micro) {
  if (m <= 0 || n <= 0) return;
  if (k <= 0 || alpha == 0.0f) {
    for (int i = 0; i < m; ++i) {
      float* row = c + static_cast<std::ptrdiff_t>(i) * ldc;
      for (int j = 0; j < n; ++j) row[j] = beta == 0.0f ? 0.0f : row[j] * beta;
    }
    return;
  }
  thread_local Scratch a_scratch;
  thread_local Scratch b_scratch;
  const int nc_max = std::min(n, kNc);
  const int kc_max = std::min(k, kKc);
  float* packed_b = b_scratch.Get(static_cast<std::size_t>(kc_max) *
                                  ((nc_max + Nr - 1) / Nr) * Nr);
  float* packed_a = a_scratch.Get(static_cast<std::size_t>(kc_max) *
                                  ((std::min(m, kMc) + Mr - 1) / Mr) * Mr);
  for (int jc = 0; jc < n; jc += kNc) {
    const int nc = std::min(kNc, n - jc);
    for (int pc = 0; pc < k; pc += kKc) {
      const int kc = std::min(kKc, k - pc);
      const float beta_eff = pc == 0 ? beta : 1.0f;
      PackB<Nr>(trans_b, b, ldb, pc, kc, jc, nc, packed_b);
      for (int ic = 0; ic < m; ic += kMc) {
        const int mc = std::min(kMc, m - ic);
        PackA<Mr>(trans_a, a, lda, ic, mc, pc, kc, packed_a);
        for (int jr = 0; jr < nc; jr += Nr) {
          const int cols = std::min(Nr, nc - jr);
          const float* bp = packed_b + static_cast<std::ptrdiff_t>(jr) * kc;
          for (int ir = 0; ir < mc; ir += Mr) {
            const int rows = std::min(Mr, mc - ir);
            const float* ap = packed_a + static_cast<std::ptrdiff_t>(ir) * kc;
            float* ct = c + static_cast<std::ptrdiff_t>(ic + ir) * ldc + jc + jr;
            micro(kc, ap, bp, ct, ldc, alpha, beta_eff, rows, cols);
          }
        }
      }
    }
  }
}

// Merges an accumulated tile into C for ragged edges.
template <int Mr, int Nr>
inline void MergeTile(const float (&tile)[Mr][Nr], float* c, int ldc,
                      float alpha, float beta, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    float* row = c + static_cast<std::ptrdiff_t>(r) * ldc;
    for (int j = 0; j < cols; ++j) {
      row[j] = beta == 0.0f ? alpha * tile[r][j]
                            : alpha * tile[r][j] + beta * row[j];
    }
  }
}

}  // namespace CDLM_GEMM_DRIVER_NAMESPACE
