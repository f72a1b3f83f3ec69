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

// AVX2 + FMA kernels. This file is compiled with -mavx2 -mfma; nothing in it
// may be called unless IsaSupported(Isa::kAvx2).

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "cdlm/simd/kernels.h"

#define CDLM_GEMM_DRIVER_NAMESPACE cdlm_avx2_gemm
#include "gemm_driver.h"

namespace cdlm::simd::internal {
namespace {

using cdlm_avx2_gemm::BlockedGemm;
using cdlm_avx2_gemm::MergeTile;

constexpr int kMr = 6;
constexpr int kNr = 16;

inline float HorizontalSum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 shuf = _mm_movehdup_ps(lo);
  __m128 sums = _mm_add_ps(lo, shuf);
  shuf = _mm_movehl_ps(shuf, sums);
  sums = _mm_add_ss(sums, shuf);
  return _mm_cvtss_f32(sums);
}

inline float HorizontalMax(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_max_ps(lo, hi);
  lo = _mm_max_ps(lo, _mm_movehl_ps(lo, lo));
  lo = _mm_max_ss(lo, _mm_movehdup_ps(lo));
  return _mm_cvtss_f32(lo);
}

// Cephes-style expf; relative error ~2 ulp on [-87, 88].
inline __m256 Exp(__m256 x) {
  const __m256 hi = _mm256_set1_ps(88.3762626647949f);
  const __m256 lo = _mm256_set1_ps(-88.3762626647949f);
  x = _mm256_min_ps(_mm256_max_ps(x, lo), hi);
  __m256 fx = _mm256_fmadd_ps(x, _mm256_set1_ps(1.44269504088896341f),
                              _mm256_set1_ps(0.5f));
  fx = _mm256_floor_ps(fx);
  x = _mm256_fnmadd_ps(fx, _mm256_set1_ps(0.693359375f), x);
  x = _mm256_fnmadd_ps(fx, _mm256_set1_ps(-2.12194440e-4f), x);
  const __m256 z = _mm256_mul_ps(x, x);
  __m256 y = _mm256_set1_ps(1.9875691500e-4f);
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(1.3981999507e-3f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(8.3334519073e-3f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(4.1665795894e-2f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(1.6666665459e-1f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(5.0000001201e-1f));
  y = _mm256_fmadd_ps(y, z, x);
  y = _mm256_add_ps(y, _mm256_set1_ps(1.0f));
  __m256i n = _mm256_cvttps_epi32(fx);
  n = _mm256_add_epi32(n, _mm256_set1_epi32(0x7f));
  n = _mm256_slli_epi32(n, 23);
  return _mm256_mul_ps(y, _mm256_castsi256_ps(n));
}

// tanh(u) = 1 - 2 / (exp(2u) + 1), saturating for large |u|.
inline __m256 Tanh(__m256 u) {
  const __m256 clamp = _mm256_set1_ps(15.0f);
  u = _mm256_min_ps(_mm256_max_ps(u, _mm256_sub_ps(_mm256_setzero_ps(), clamp)),
                    clamp);
  const __m256 e = Exp(_mm256_add_ps(u, u));
  const __m256 one = _mm256_set1_ps(1.0f);
  return _mm256_sub_ps(
      one, _mm256_div_ps(_mm256_set1_ps(2.0f), _mm256_add_ps(e, one)));
}

void Micro6x16(int kc, const float* ap, const float* bp, float* c, int ldc,
               float alpha, float beta, int rows, int cols) {
  __m256 acc[kMr][2];
  for (int r = 0; r < kMr; ++r) {
    acc[r][0] = _mm256_setzero_ps();
    acc[r][1] = _mm256_setzero_ps();
  }
  for (int p = 0; p < kc; ++p) {
    const __m256 b0 = _mm256_load_ps(bp);
    const __m256 b1 = _mm256_load_ps(bp + 8);
    for (int r = 0; r < kMr; ++r) {
      const __m256 av = _mm256_broadcast_ss(ap + r);
      acc[r][0] = _mm256_fmadd_ps(av, b0, acc[r][0]);
      acc[r][1] = _mm256_fmadd_ps(av, b1, acc[r][1]);
    }
    ap += kMr;
    bp += kNr;
  }
  if (rows == kMr && cols == kNr) {
    const __m256 va = _mm256_set1_ps(alpha);
    const __m256 vb = _mm256_set1_ps(beta);
    for (int r = 0; r < kMr; ++r) {
      float* row = c + static_cast<std::ptrdiff_t>(r) * ldc;
      __m256 o0 = _mm256_mul_ps(va, acc[r][0]);
      __m256 o1 = _mm256_mul_ps(va, acc[r][1]);
      if (beta != 0.0f) {
        o0 = _mm256_fmadd_ps(vb, _mm256_loadu_ps(row), o0);
        o1 = _mm256_fmadd_ps(vb, _mm256_loadu_ps(row + 8), o1);
      }
      _mm256_storeu_ps(row, o0);
      _mm256_storeu_ps(row + 8, o1);
    }
    return;
  }
  alignas(32) float tile[kMr][kNr];
  for (int r = 0; r < kMr; ++r) {
    _mm256_store_ps(tile[r], acc[r][0]);
    _mm256_store_ps(tile[r] + 8, acc[r][1]);
  }
  MergeTile<kMr, kNr>(tile, c, ldc, alpha, beta, rows, cols);
}

void Gemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
          const float* a, int lda, const float* b, int ldb, float beta,
          float* c, int ldc) {
  BlockedGemm<kMr, kNr>(trans_a, trans_b, m, n, k, alpha, a, lda, b, ldb, beta,
                        c, ldc, Micro6x16);
}

void SoftmaxRows(float* x, int rows, int cols, int ld, float scale) {
  const __m256 vscale = _mm256_set1_ps(scale);
  for (int r = 0; r < rows; ++r) {
    float* row = x + static_cast<std::ptrdiff_t>(r) * ld;
    int j = 0;
    __m256 vmax = _mm256_set1_ps(-INFINITY);
    for (; j + 8 <= cols; j += 8) {
      const __m256 v = _mm256_mul_ps(_mm256_loadu_ps(row + j), vscale);
      _mm256_storeu_ps(row + j, v);
      vmax = _mm256_max_ps(vmax, v);
    }
    float max_v = HorizontalMax(vmax);
    for (; j < cols; ++j) {
      row[j] *= scale;
      max_v = std::fmax(max_v, row[j]);
    }
    const __m256 bmax = _mm256_set1_ps(max_v);
    __m256 vsum = _mm256_setzero_ps();
    j = 0;
    for (; j + 8 <= cols; j += 8) {
      const __m256 e = Exp(_mm256_sub_ps(_mm256_loadu_ps(row + j), bmax));
      _mm256_storeu_ps(row + j, e);
      vsum = _mm256_add_ps(vsum, e);
    }
    float sum = HorizontalSum(vsum);
    for (; j < cols; ++j) {
      row[j] = std::exp(row[j] - max_v);
      sum += row[j];
    }
    const float inv = 1.0f / sum;
    const __m256 vinv = _mm256_set1_ps(inv);
    j = 0;
    for (; j + 8 <= cols; j += 8) {
      _mm256_storeu_ps(row + j, _mm256_mul_ps(_mm256_loadu_ps(row + j), vinv));
    }
    for (; j < cols; ++j) row[j] *= inv;
  }
}

constexpr float kGeluC = 0.7978845608028654f;
constexpr float kGeluA = 0.044715f;

void GeluForward(const float* x, float* y, std::size_t n) {
  const __m256 c = _mm256_set1_ps(kGeluC);
  const __m256 a = _mm256_set1_ps(kGeluA);
  const __m256 half = _mm256_set1_ps(0.5f);
  const __m256 one = _mm256_set1_ps(1.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_loadu_ps(x + i);
    const __m256 v3 = _mm256_mul_ps(_mm256_mul_ps(v, v), v);
    const __m256 u = _mm256_mul_ps(c, _mm256_fmadd_ps(a, v3, v));
    const __m256 out =
        _mm256_mul_ps(_mm256_mul_ps(half, v), _mm256_add_ps(one, Tanh(u)));
    _mm256_storeu_ps(y + i, out);
  }
  for (; i < n; ++i) {
    const float v = x[i];
    y[i] = 0.5f * v * (1.0f + std::tanh(kGeluC * (v + kGeluA * v * v * v)));
  }
}

void GeluBackward(const float* x, const float* dy, float* dx, std::size_t n) {
  const __m256 c = _mm256_set1_ps(kGeluC);
  const __m256 a = _mm256_set1_ps(kGeluA);
  const __m256 a3 = _mm256_set1_ps(3.0f * kGeluA);
  const __m256 half = _mm256_set1_ps(0.5f);
  const __m256 one = _mm256_set1_ps(1.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_loadu_ps(x + i);
    const __m256 v2 = _mm256_mul_ps(v, v);
    const __m256 u = _mm256_mul_ps(c, _mm256_fmadd_ps(_mm256_mul_ps(a, v2), v, v));
    const __m256 th = Tanh(u);
    const __m256 du = _mm256_mul_ps(c, _mm256_fmadd_ps(a3, v2, one));
    const __m256 sech2 = _mm256_fnmadd_ps(th, th, one);
    const __m256 g = _mm256_fmadd_ps(
        _mm256_mul_ps(_mm256_mul_ps(half, v), sech2), du,
        _mm256_mul_ps(half, _mm256_add_ps(one, th)));
    _mm256_storeu_ps(dx + i, _mm256_mul_ps(_mm256_loadu_ps(dy + i), g));
  }
  for (; i < n; ++i) {
    const float v = x[i];
    const float th = std::tanh(kGeluC * (v + kGeluA * v * v * v));
    const float du = kGeluC * (1.0f + 3.0f * kGeluA * v * v);
    dx[i] = dy[i] * (0.5f * (1.0f + th) + 0.5f * v * (1.0f - th * th) * du);
  }
}

void AdamWUpdate(float* param, const float* grad, float* m, float* v,
                 std::size_t n, const AdamWStep& s) {
  const __m256 b1 = _mm256_set1_ps(s.beta1);
  const __m256 b2 = _mm256_set1_ps(s.beta2);
  const __m256 one_b1 = _mm256_set1_ps(1.0f - s.beta1);
  const __m256 one_b2 = _mm256_set1_ps(1.0f - s.beta2);
  const float step_size = s.lr / s.bias_correction1;
  const float inv_bc2 = 1.0f / s.bias_correction2;
  const float decay = 1.0f - s.lr * s.weight_decay;
  const __m256 vstep = _mm256_set1_ps(step_size);
  const __m256 vinv_bc2 = _mm256_set1_ps(inv_bc2);
  const __m256 vdecay = _mm256_set1_ps(decay);
  const __m256 veps = _mm256_set1_ps(s.eps);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 g = _mm256_loadu_ps(grad + i);
    __m256 mi = _mm256_loadu_ps(m + i);
    __m256 vi = _mm256_loadu_ps(v + i);
    mi = _mm256_fmadd_ps(b1, mi, _mm256_mul_ps(one_b1, g));
    vi = _mm256_fmadd_ps(b2, vi, _mm256_mul_ps(one_b2, _mm256_mul_ps(g, g)));
    _mm256_storeu_ps(m + i, mi);
    _mm256_storeu_ps(v + i, vi);
    const __m256 denom =
        _mm256_add_ps(_mm256_sqrt_ps(_mm256_mul_ps(vi, vinv_bc2)), veps);
    const __m256 p = _mm256_loadu_ps(param + i);
    const __m256 upd = _mm256_div_ps(_mm256_mul_ps(vstep, mi), denom);
    _mm256_storeu_ps(param + i, _mm256_fmsub_ps(p, vdecay, upd));
  }
  for (; i < n; ++i) {
    m[i] = s.beta1 * m[i] + (1.0f - s.beta1) * grad[i];
    v[i] = s.beta2 * v[i] + (1.0f - s.beta2) * grad[i] * grad[i];
    const float denom = std::sqrt(v[i] * inv_bc2) + s.eps;
    param[i] = param[i] * decay - step_size * m[i] / denom;
  }
}

float Dot(const float* x, const float* y, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i + 8),
                           _mm256_loadu_ps(y + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
  }
  float sum = HorizontalSum(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

void Axpy(float a, const float* x, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i),
                                            _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

}  // namespace

const KernelTable& Avx2Table() {
  static const KernelTable table{Isa::kAvx2,   Gemm,        SoftmaxRows,
                                 GeluForward,  GeluBackward, AdamWUpdate,
                                 Dot,          Axpy};
  return table;
}

}  // namespace cdlm::simd::internal
