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

// Float32 compute kernels behind a runtime-selected dispatch table.
//
// Every kernel has a portable scalar reference (reference.h) and one or more
// x86 variants. The table for the best ISA the host supports is chosen on
// first use; CDLM_SIMD=scalar|avx2|avx512 overrides the choice.

#ifndef CDLM_SIMD_KERNELS_H_
#define CDLM_SIMD_KERNELS_H_

#include <cstddef>
#include <string_view>

namespace cdlm::simd {

enum class Isa { kScalar, kAvx2, kAvx512 };

std::string_view IsaName(Isa isa);

// Hyper-parameters of one AdamW step, with bias corrections folded in.
struct AdamWStep {
  float lr = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
  float weight_decay = 0.0f;
  float bias_correction1 = 1.0f;  // 1 - beta1^t
  float bias_correction2 = 1.0f;  // 1 - beta2^t
};

struct KernelTable {
  Isa isa;

  // Row-major C = alpha * op(A) * op(B) + beta * C, BLAS sgemm semantics.
  // op(A) is m x k, op(B) is k x n. With beta == 0, C is not read.
  void (*gemm)(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
               const float* a, int lda, const float* b, int ldb, float beta,
               float* c, int ldc);

  // In-place numerically stable softmax over each of `rows` rows of length
  // `cols`, after multiplying the row by `scale`.
  void (*softmax_rows)(float* x, int rows, int cols, int ld, float scale);

  // Tanh-form GELU and its derivative: dx = dy * gelu'(x).
  void (*gelu_forward)(const float* x, float* y, std::size_t n);
  void (*gelu_backward)(const float* x, const float* dy, float* dx,
                        std::size_t n);

  // Decoupled-weight-decay Adam update over a flat parameter block.
  void (*adamw_update)(float* param, const float* grad, float* m, float* v,
                       std::size_t n, const AdamWStep& step);

  float (*dot)(const float* x, const float* y, std::size_t n);
  // y += a * x
  void (*axpy)(float a, const float* x, float* y, std::size_t n);
};

bool IsaSupported(Isa isa);

// Best ISA supported by both the build and the host CPU.
Isa BestIsa();

// Table for a specific ISA; throws std::invalid_argument if unsupported.
const KernelTable& KernelsFor(Isa isa);

// Active table (BestIsa() unless overridden by CDLM_SIMD or ForceIsa).
const KernelTable& Kernels();

void ForceIsa(Isa isa);

// Parses "scalar", "avx2" or "avx512".
Isa ParseIsa(std::string_view name);

namespace internal {
const KernelTable& ScalarTable();
#if defined(CDLM_HAVE_X86_SIMD)
const KernelTable& Avx2Table();
const KernelTable& Avx512Table();
#endif
}  // namespace internal

}  // namespace cdlm::simd

#endif  // CDLM_SIMD_KERNELS_H_
