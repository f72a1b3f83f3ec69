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

// Portable reference kernels, templated on the element type. The float
// instantiations form the scalar dispatch table; the double instantiations
// drive the double-precision model used for finite-difference checks.

#ifndef CDLM_SIMD_REFERENCE_H_
#define CDLM_SIMD_REFERENCE_H_

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace cdlm::simd::reference {

template <typename T>
void Gemm(bool trans_a, bool trans_b, int m, int n, int k, T alpha,
          const T* a, int lda, const T* b, int ldb, T beta, T* c, int ldc) {
  for (int i = 0; i < m; ++i) {
    T* c_row = c + static_cast<std::ptrdiff_t>(i) * ldc;
    if (beta == T(0)) {
      std::fill(c_row, c_row + n, T(0));
    } else if (beta != T(1)) {
      for (int j = 0; j < n; ++j) c_row[j] *= beta;
    }
    for (int p = 0; p < k; ++p) {
      const T a_ip = trans_a ? a[static_cast<std::ptrdiff_t>(p) * lda + i]
                             : a[static_cast<std::ptrdiff_t>(i) * lda + p];
      const T scaled = alpha * a_ip;
      if (scaled == T(0)) continue;
      if (!trans_b) {
        const T* b_row = b + static_cast<std::ptrdiff_t>(p) * ldb;
        for (int j = 0; j < n; ++j) c_row[j] += scaled * b_row[j];
      } else {
        for (int j = 0; j < n; ++j) {
          c_row[j] += scaled * b[static_cast<std::ptrdiff_t>(j) * ldb + p];
        }
      }
    }
  }
}

template <typename T>
void SoftmaxRows(T* x, int rows, int cols, int ld, T scale) {
  for (int r = 0; r < rows; ++r) {
    T* row = x + static_cast<std::ptrdiff_t>(r) * ld;
    T max_v = row[0] * scale;
    for (int j = 0; j < cols; ++j) {
      row[j] *= scale;
      max_v = std::max(max_v, row[j]);
    }
    T sum = 0;
    for (int j = 0; j < cols; ++j) {
      row[j] = std::exp(row[j] - max_v);
      sum += row[j];
    }
    const T inv = T(1) / sum;
    for (int j = 0; j < cols; ++j) row[j] *= inv;
  }
}

// sqrt(2 / pi)
inline constexpr double kGeluC = 0.7978845608028654;
inline constexpr double kGeluA = 0.044715;

template <typename T>
void GeluForward(const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const T v = x[i];
    const T u = T(kGeluC) * (v + T(kGeluA) * v * v * v);
    y[i] = T(0.5) * v * (T(1) + std::tanh(u));
  }
}

template <typename T>
void GeluBackward(const T* x, const T* dy, T* dx, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const T v = x[i];
    const T u = T(kGeluC) * (v + T(kGeluA) * v * v * v);
    const T th = std::tanh(u);
    const T du = T(kGeluC) * (T(1) + T(3 * kGeluA) * v * v);
    const T grad = T(0.5) * (T(1) + th) + T(0.5) * v * (T(1) - th * th) * du;
    dx[i] = dy[i] * grad;
  }
}

template <typename T, typename Step>
void AdamWUpdate(T* param, const T* grad, T* m, T* v, std::size_t n,
                 const Step& s) {
  const T b1 = T(s.beta1);
  const T b2 = T(s.beta2);
  const T step_size = T(s.lr) / T(s.bias_correction1);
  const T inv_bc2 = T(1) / T(s.bias_correction2);
  const T decay = T(1) - T(s.lr) * T(s.weight_decay);
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (T(1) - b1) * grad[i];
    v[i] = b2 * v[i] + (T(1) - b2) * grad[i] * grad[i];
    const T denom = std::sqrt(v[i] * inv_bc2) + T(s.eps);
    param[i] = param[i] * decay - step_size * m[i] / denom;
  }
}

template <typename T>
T Dot(const T* x, const T* y, std::size_t n) {
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

template <typename T>
void Axpy(T a, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

}  // namespace cdlm::simd::reference

#endif  // CDLM_SIMD_REFERENCE_H_
