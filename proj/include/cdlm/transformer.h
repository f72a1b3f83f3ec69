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

// Bidirectional pre-LayerNorm transformer denoiser with hand-written
// backpropagation.
//
// Layout per block: x += Drop(Attn(LN1(x))); x += Drop(MLP(LN2(x))), GELU MLP,
// full (non-causal) multi-head self-attention, learned absolute position
// embeddings, a final LayerNorm and a linear vocabulary head. There is no
// timestep input; the mask pattern carries the corruption level.
//
// Transformer<float> runs on the dispatched SIMD kernels. Transformer<double>
// runs the same code on the reference kernels and exists for finite-difference
// gradient checks.

#ifndef CDLM_TRANSFORMER_H_
#define CDLM_TRANSFORMER_H_

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cdlm/rng.h"
#include "cdlm/sequence.h"

namespace cdlm {

struct ModelConfig {
  int layers = 4;
  int hidden = 128;
  int heads = 4;
  int mlp_ratio = 4;
  double dropout = 0.0;
  int seq_len = 81;
  Vocabulary vocab{10, 0};

  // 4 layers, width 128, 4 heads, 81 positions over {mask, 1..9}.
  static ModelConfig Desk();
  // 12 layers, width 512, 8 heads, MLP ratio 4, dropout 0.1.
  static ModelConfig FullSudoku();

  int head_dim() const { return hidden / heads; }
  int ffn() const { return hidden * mlp_ratio; }

  // Throws std::invalid_argument on inconsistent fields.
  void Validate() const;

  nlohmann::json ToJson() const;
  static ModelConfig FromJson(const nlohmann::json& j);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct TensorInfo {
  std::string name;
  std::vector<int> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
  bool weight_decay = false;
};

class NonFiniteActivationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Activations retained by Forward for the backward pass.
template <typename T>
struct ForwardCache {
  struct Layer {
    std::vector<T> x_in;      // residual stream entering the block
    std::vector<T> ln1_hat;   // normalized, pre-affine
    std::vector<T> ln1_rstd;
    std::vector<T> ln1_out;
    std::vector<T> qkv;
    std::vector<T> probs;     // [batch, heads, L, L]
    std::vector<T> att;       // concatenated head outputs
    std::vector<T> drop1;     // dropout scale per element (empty if off)
    std::vector<T> x_mid;
    std::vector<T> ln2_hat;
    std::vector<T> ln2_rstd;
    std::vector<T> ln2_out;
    std::vector<T> pre_act;
    std::vector<T> act;
    std::vector<T> drop2;
  };
  int batch = 0;
  std::vector<Token> tokens;
  std::vector<Layer> layers;
  std::vector<T> x_final;
  std::vector<T> lnf_hat;
  std::vector<T> lnf_rstd;
  std::vector<T> lnf_out;
  std::vector<T> logits;  // [batch * L, vocab]
};

template <typename T>
class Transformer {
 public:
  explicit Transformer(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  std::size_t num_params() const { return params_.size(); }
  std::span<T> params() { return params_; }
  std::span<const T> params() const { return params_; }

  // Throws std::out_of_range for an unknown name.
  const TensorInfo& tensor(const std::string& name) const;
  std::span<T> tensor_data(const std::string& name);
  std::span<const T> tensor_data(const std::string& name) const;

  // Truncated-normal(0.02) projections and embeddings, unit LayerNorm gains,
  // zero biases and a zero vocabulary head.
  void InitParams(Rng rng);

  // Runs `batch` sequences of length seq_len laid out back to back. When
  // `training` is set and dropout > 0, masks are drawn from `dropout_rng`.
  // Logits land in cache.logits. Throws std::invalid_argument on shape or
  // token errors and NonFiniteActivationError on NaN/Inf activations.
  void Forward(std::span<const Token> tokens, int batch, bool training,
               Rng dropout_rng, ForwardCache<T>& cache) const;

  // Accumulates d(loss)/d(params) into `grads` (same layout as params())
  // given d(loss)/d(logits) for the batch recorded in `cache`.
  void Backward(const ForwardCache<T>& cache, std::span<const T> dlogits,
                std::span<T> grads) const;

 private:
  std::size_t AddTensor(const std::string& name, std::vector<int> shape,
                        bool decay);

  ModelConfig config_;
  std::vector<TensorInfo> tensors_;
  std::vector<T> params_;

  struct LayerOffsets {
    std::size_t ln1_g, ln1_b, w_qkv, b_qkv, w_o, b_o;
    std::size_t ln2_g, ln2_b, w_fc1, b_fc1, w_fc2, b_fc2;
  };
  std::size_t tok_emb_ = 0;
  std::size_t pos_emb_ = 0;
  std::vector<LayerOffsets> layer_off_;
  std::size_t lnf_g_ = 0;
  std::size_t lnf_b_ = 0;
  std::size_t head_w_ = 0;
  std::size_t head_b_ = 0;
};

extern template class Transformer<float>;
extern template class Transformer<double>;

}  // namespace cdlm

#endif  // CDLM_TRANSFORMER_H_
