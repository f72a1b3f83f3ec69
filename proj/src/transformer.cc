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

#include "cdlm/transformer.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cdlm/simd/kernels.h"
#include "cdlm/simd/reference.h"

namespace cdlm {

namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr double kInitStd = 0.02;

template <typename T>
struct Backend;

template <>
struct Backend<float> {
  static void Gemm(bool ta, bool tb, int m, int n, int k, float alpha,
                   const float* a, int lda, const float* b, int ldb, float beta,
                   float* c, int ldc) {
    simd::Kernels().gemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
  }
  static void Softmax(float* x, int rows, int cols, int ld, float scale) {
    simd::Kernels().softmax_rows(x, rows, cols, ld, scale);
  }
  static void Gelu(const float* x, float* y, std::size_t n) {
    simd::Kernels().gelu_forward(x, y, n);
  }
  static void GeluGrad(const float* x, const float* dy, float* dx,
                       std::size_t n) {
    simd::Kernels().gelu_backward(x, dy, dx, n);
  }
};

template <>
struct Backend<double> {
  static void Gemm(bool ta, bool tb, int m, int n, int k, double alpha,
                   const double* a, int lda, const double* b, int ldb,
                   double beta, double* c, int ldc) {
    simd::reference::Gemm<double>(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta,
                                  c, ldc);
  }
  static void Softmax(double* x, int rows, int cols, int ld, double scale) {
    simd::reference::SoftmaxRows<double>(x, rows, cols, ld, scale);
  }
  static void Gelu(const double* x, double* y, std::size_t n) {
    simd::reference::GeluForward<double>(x, y, n);
  }
  static void GeluGrad(const double* x, const double* dy, double* dx,
                       std::size_t n) {
    simd::reference::GeluBackward<double>(x, dy, dx, n);
  }
};

template <typename T>
void LayerNormForward(const T* x, int rows, int dim, const T* gain,
                      const T* bias, T* hat, T* rstd, T* out) {
  for (int r = 0; r < rows; ++r) {
    const T* xr = x + static_cast<std::size_t>(r) * dim;
    T* hr = hat + static_cast<std::size_t>(r) * dim;
    T* orow = out + static_cast<std::size_t>(r) * dim;
    T mean = 0;
    for (int j = 0; j < dim; ++j) mean += xr[j];
    mean /= static_cast<T>(dim);
    T var = 0;
    for (int j = 0; j < dim; ++j) {
      const T d = xr[j] - mean;
      var += d * d;
    }
    var /= static_cast<T>(dim);
    const T rs = T(1) / std::sqrt(var + static_cast<T>(kLayerNormEps));
    rstd[r] = rs;
    for (int j = 0; j < dim; ++j) {
      hr[j] = (xr[j] - mean) * rs;
      orow[j] = hr[j] * gain[j] + bias[j];
    }
  }
}

// dx += LayerNorm backward of dy; accumulates gain/bias gradients.
template <typename T>
void LayerNormBackward(const T* dy, const T* hat, const T* rstd, int rows,
                       int dim, const T* gain, T* dgain, T* dbias, T* dx) {
  std::vector<T> dhat(static_cast<std::size_t>(dim));
  for (int r = 0; r < rows; ++r) {
    const T* dyr = dy + static_cast<std::size_t>(r) * dim;
    const T* hr = hat + static_cast<std::size_t>(r) * dim;
    T* dxr = dx + static_cast<std::size_t>(r) * dim;
    T mean_d = 0;
    T mean_dh = 0;
    for (int j = 0; j < dim; ++j) {
      dgain[j] += dyr[j] * hr[j];
      dbias[j] += dyr[j];
      dhat[j] = dyr[j] * gain[j];
      mean_d += dhat[j];
      mean_dh += dhat[j] * hr[j];
    }
    mean_d /= static_cast<T>(dim);
    mean_dh /= static_cast<T>(dim);
    for (int j = 0; j < dim; ++j) {
      dxr[j] += rstd[r] * (dhat[j] - mean_d - hr[j] * mean_dh);
    }
  }
}

template <typename T>
void AddBiasRows(T* x, int rows, int cols, const T* bias) {
  for (int r = 0; r < rows; ++r) {
    T* xr = x + static_cast<std::size_t>(r) * cols;
    for (int j = 0; j < cols; ++j) xr[j] += bias[j];
  }
}

template <typename T>
void AccumulateColumnSums(const T* x, int rows, int cols, T* out) {
  for (int r = 0; r < rows; ++r) {
    const T* xr = x + static_cast<std::size_t>(r) * cols;
    for (int j = 0; j < cols; ++j) out[j] += xr[j];
  }
}

template <typename T>
void CheckFinite(const std::vector<T>& v, int dim, const std::string& where) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NonFiniteActivationError(
          "non-finite activation in " + where + " at token " +
          std::to_string(i / static_cast<std::size_t>(dim)) + ", channel " +
          std::to_string(i % static_cast<std::size_t>(dim)));
    }
  }
}

template <typename T>
void DrawDropout(std::vector<T>& scale, std::size_t n, double p, Rng rng) {
  scale.resize(n);
  const T keep = static_cast<T>(1.0 / (1.0 - p));
  for (std::size_t i = 0; i < n; ++i) {
    scale[i] = rng.Uniform() < p ? T(0) : keep;
  }
}

double TruncatedNormal(Rng& rng, double std) {
  for (;;) {
    const double z = rng.Normal();
    if (std::abs(z) <= 2.0) return z * std;
  }
}

}  // namespace

ModelConfig ModelConfig::Desk() { return ModelConfig{}; }

ModelConfig ModelConfig::FullSudoku() {
  ModelConfig c;
  c.layers = 12;
  c.hidden = 512;
  c.heads = 8;
  c.mlp_ratio = 4;
  c.dropout = 0.1;
  return c;
}

void ModelConfig::Validate() const {
  if (layers < 1) throw std::invalid_argument("layers must be >= 1");
  if (hidden < 1 || heads < 1 || hidden % heads != 0) {
    throw std::invalid_argument("hidden must be a positive multiple of heads");
  }
  if (mlp_ratio < 1) throw std::invalid_argument("mlp_ratio must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw std::invalid_argument("dropout must lie in [0, 1)");
  }
  if (seq_len < 1) throw std::invalid_argument("seq_len must be >= 1");
}

nlohmann::json ModelConfig::ToJson() const {
  return {{"layers", layers},       {"hidden", hidden},
          {"heads", heads},         {"mlp_ratio", mlp_ratio},
          {"dropout", dropout},     {"seq_len", seq_len},
          {"vocab_size", vocab.size()}, {"mask_id", vocab.mask_id()}};
}

ModelConfig ModelConfig::FromJson(const nlohmann::json& j) {
  ModelConfig c;
  c.layers = j.at("layers").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.heads = j.at("heads").get<int>();
  c.mlp_ratio = j.at("mlp_ratio").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.seq_len = j.at("seq_len").get<int>();
  c.vocab = Vocabulary(j.at("vocab_size").get<int>(), j.at("mask_id").get<Token>());
  c.Validate();
  return c;
}

template <typename T>
Transformer<T>::Transformer(const ModelConfig& config) : config_(config) {
  config_.Validate();
  const int h = config_.hidden;
  const int f = config_.ffn();
  const int v = config_.vocab.size();
  tok_emb_ = AddTensor("tok_emb", {v, h}, true);
  pos_emb_ = AddTensor("pos_emb", {config_.seq_len, h}, true);
  for (int l = 0; l < config_.layers; ++l) {
    const std::string p = "blocks." + std::to_string(l) + ".";
    LayerOffsets o{};
    o.ln1_g = AddTensor(p + "ln1.gain", {h}, false);
    o.ln1_b = AddTensor(p + "ln1.bias", {h}, false);
    o.w_qkv = AddTensor(p + "attn.qkv.weight", {h, 3 * h}, true);
    o.b_qkv = AddTensor(p + "attn.qkv.bias", {3 * h}, false);
    o.w_o = AddTensor(p + "attn.out.weight", {h, h}, true);
    o.b_o = AddTensor(p + "attn.out.bias", {h}, false);
    o.ln2_g = AddTensor(p + "ln2.gain", {h}, false);
    o.ln2_b = AddTensor(p + "ln2.bias", {h}, false);
    o.w_fc1 = AddTensor(p + "mlp.fc1.weight", {h, f}, true);
    o.b_fc1 = AddTensor(p + "mlp.fc1.bias", {f}, false);
    o.w_fc2 = AddTensor(p + "mlp.fc2.weight", {f, h}, true);
    o.b_fc2 = AddTensor(p + "mlp.fc2.bias", {h}, false);
    layer_off_.push_back(o);
  }
  lnf_g_ = AddTensor("ln_f.gain", {h}, false);
  lnf_b_ = AddTensor("ln_f.bias", {h}, false);
  head_w_ = AddTensor("head.weight", {h, v}, true);
  head_b_ = AddTensor("head.bias", {v}, false);
  params_.assign(tensors_.back().offset + tensors_.back().size, T(0));
}

template <typename T>
std::size_t Transformer<T>::AddTensor(const std::string& name,
                                      std::vector<int> shape, bool decay) {
  std::size_t offset = 0;
  if (!tensors_.empty()) {
    offset = tensors_.back().offset + tensors_.back().size;
    offset = (offset + 15) / 16 * 16;
  }
  const std::size_t size = std::accumulate(
      shape.begin(), shape.end(), std::size_t{1},
      [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
  tensors_.push_back({name, std::move(shape), offset, size, decay});
  return offset;
}

template <typename T>
const TensorInfo& Transformer<T>::tensor(const std::string& name) const {
  for (const TensorInfo& t : tensors_) {
    if (t.name == name) return t;
  }
  throw std::out_of_range("no tensor named " + name);
}

template <typename T>
std::span<T> Transformer<T>::tensor_data(const std::string& name) {
  const TensorInfo& t = tensor(name);
  return std::span<T>(params_).subspan(t.offset, t.size);
}

template <typename T>
std::span<const T> Transformer<T>::tensor_data(const std::string& name) const {
  const TensorInfo& t = tensor(name);
  return std::span<const T>(params_).subspan(t.offset, t.size);
}

template <typename T>
void Transformer<T>::InitParams(Rng rng) {
  std::fill(params_.begin(), params_.end(), T(0));
  for (const TensorInfo& t : tensors_) {
    T* p = params_.data() + t.offset;
    const bool is_gain = t.name.ends_with(".gain");
    const bool is_head = t.name == "head.weight";
    if (is_gain) {
      std::fill(p, p + t.size, T(1));
    } else if (t.shape.size() == 2 && !is_head) {
      for (std::size_t i = 0; i < t.size; ++i) {
        p[i] = static_cast<T>(TruncatedNormal(rng, kInitStd));
      }
    }
  }
}

template <typename T>
void Transformer<T>::Forward(std::span<const Token> tokens, int batch,
                             bool training, Rng dropout_rng,
                             ForwardCache<T>& cache) const {
  using B = Backend<T>;
  const int seq = config_.seq_len;
  const int h = config_.hidden;
  const int f = config_.ffn();
  const int v = config_.vocab.size();
  const int nh = config_.heads;
  const int dh = config_.head_dim();
  if (batch < 1 || tokens.size() != static_cast<std::size_t>(batch) * seq) {
    throw std::invalid_argument(
        "input length " + std::to_string(tokens.size()) +
        " does not match batch x seq_len = " + std::to_string(batch) + " x " +
        std::to_string(seq));
  }
  for (Token t : tokens) {
    if (!config_.vocab.Contains(t)) {
      throw std::invalid_argument("token " + std::to_string(t) +
                                  " outside vocabulary");
    }
  }
  const int n = batch * seq;
  const std::size_t nh_sz = static_cast<std::size_t>(n) * h;
  const bool use_dropout = training && config_.dropout > 0.0;
  const T* P = params_.data();

  cache.batch = batch;
  cache.tokens.assign(tokens.begin(), tokens.end());
  cache.layers.resize(static_cast<std::size_t>(config_.layers));

  std::vector<T> x(nh_sz);
  for (int i = 0; i < n; ++i) {
    const T* te = P + tok_emb_ + static_cast<std::size_t>(tokens[i]) * h;
    const T* pe = P + pos_emb_ + static_cast<std::size_t>(i % seq) * h;
    T* xr = x.data() + static_cast<std::size_t>(i) * h;
    for (int j = 0; j < h; ++j) xr[j] = te[j] + pe[j];
  }

  const T att_scale = T(1) / std::sqrt(static_cast<T>(dh));
  std::vector<T> branch(nh_sz);
  for (int l = 0; l < config_.layers; ++l) {
    const LayerOffsets& o = layer_off_[static_cast<std::size_t>(l)];
    auto& c = cache.layers[static_cast<std::size_t>(l)];
    c.x_in = x;
    c.ln1_hat.resize(nh_sz);
    c.ln1_rstd.resize(static_cast<std::size_t>(n));
    c.ln1_out.resize(nh_sz);
    LayerNormForward(x.data(), n, h, P + o.ln1_g, P + o.ln1_b, c.ln1_hat.data(),
                     c.ln1_rstd.data(), c.ln1_out.data());

    c.qkv.resize(static_cast<std::size_t>(n) * 3 * h);
    B::Gemm(false, false, n, 3 * h, h, T(1), c.ln1_out.data(), h, P + o.w_qkv,
            3 * h, T(0), c.qkv.data(), 3 * h);
    AddBiasRows(c.qkv.data(), n, 3 * h, P + o.b_qkv);

    c.probs.resize(static_cast<std::size_t>(batch) * nh * seq * seq);
    c.att.resize(nh_sz);
    for (int b = 0; b < batch; ++b) {
      const T* qkv_b = c.qkv.data() + static_cast<std::size_t>(b) * seq * 3 * h;
      for (int hd = 0; hd < nh; ++hd) {
        const T* q = qkv_b + hd * dh;
        const T* k = qkv_b + h + hd * dh;
        const T* val = qkv_b + 2 * h + hd * dh;
        T* pr = c.probs.data() +
                (static_cast<std::size_t>(b) * nh + hd) * seq * seq;
        B::Gemm(false, true, seq, seq, dh, T(1), q, 3 * h, k, 3 * h, T(0), pr,
                seq);
        B::Softmax(pr, seq, seq, seq, att_scale);
        T* out = c.att.data() + static_cast<std::size_t>(b) * seq * h + hd * dh;
        B::Gemm(false, false, seq, dh, seq, T(1), pr, seq, val, 3 * h, T(0),
                out, h);
      }
    }
    B::Gemm(false, false, n, h, h, T(1), c.att.data(), h, P + o.w_o, h, T(0),
            branch.data(), h);
    AddBiasRows(branch.data(), n, h, P + o.b_o);
    if (use_dropout) {
      DrawDropout(c.drop1, nh_sz, config_.dropout,
                  dropout_rng.Split(static_cast<std::uint64_t>(2 * l)));
      for (std::size_t i = 0; i < nh_sz; ++i) branch[i] *= c.drop1[i];
    } else {
      c.drop1.clear();
    }
    for (std::size_t i = 0; i < nh_sz; ++i) x[i] += branch[i];
    c.x_mid = x;

    c.ln2_hat.resize(nh_sz);
    c.ln2_rstd.resize(static_cast<std::size_t>(n));
    c.ln2_out.resize(nh_sz);
    LayerNormForward(x.data(), n, h, P + o.ln2_g, P + o.ln2_b, c.ln2_hat.data(),
                     c.ln2_rstd.data(), c.ln2_out.data());
    const std::size_t nf_sz = static_cast<std::size_t>(n) * f;
    c.pre_act.resize(nf_sz);
    c.act.resize(nf_sz);
    B::Gemm(false, false, n, f, h, T(1), c.ln2_out.data(), h, P + o.w_fc1, f,
            T(0), c.pre_act.data(), f);
    AddBiasRows(c.pre_act.data(), n, f, P + o.b_fc1);
    B::Gelu(c.pre_act.data(), c.act.data(), nf_sz);
    B::Gemm(false, false, n, h, f, T(1), c.act.data(), f, P + o.w_fc2, h, T(0),
            branch.data(), h);
    AddBiasRows(branch.data(), n, h, P + o.b_fc2);
    if (use_dropout) {
      DrawDropout(c.drop2, nh_sz, config_.dropout,
                  dropout_rng.Split(static_cast<std::uint64_t>(2 * l + 1)));
      for (std::size_t i = 0; i < nh_sz; ++i) branch[i] *= c.drop2[i];
    } else {
      c.drop2.clear();
    }
    for (std::size_t i = 0; i < nh_sz; ++i) x[i] += branch[i];
    CheckFinite(x, h, "block " + std::to_string(l) + " output");
  }

  cache.x_final = x;
  cache.lnf_hat.resize(nh_sz);
  cache.lnf_rstd.resize(static_cast<std::size_t>(n));
  cache.lnf_out.resize(nh_sz);
  LayerNormForward(x.data(), n, h, P + lnf_g_, P + lnf_b_, cache.lnf_hat.data(),
                   cache.lnf_rstd.data(), cache.lnf_out.data());
  cache.logits.resize(static_cast<std::size_t>(n) * v);
  B::Gemm(false, false, n, v, h, T(1), cache.lnf_out.data(), h, P + head_w_, v,
          T(0), cache.logits.data(), v);
  AddBiasRows(cache.logits.data(), n, v, P + head_b_);
  CheckFinite(cache.logits, v, "vocabulary head");
}

template <typename T>
void Transformer<T>::Backward(const ForwardCache<T>& cache,
                              std::span<const T> dlogits,
                              std::span<T> grads) const {
  using B = Backend<T>;
  const int seq = config_.seq_len;
  const int h = config_.hidden;
  const int f = config_.ffn();
  const int v = config_.vocab.size();
  const int nh = config_.heads;
  const int dh = config_.head_dim();
  const int batch = cache.batch;
  const int n = batch * seq;
  const std::size_t nh_sz = static_cast<std::size_t>(n) * h;
  if (dlogits.size() != static_cast<std::size_t>(n) * v) {
    throw std::invalid_argument("dlogits shape does not match forward batch");
  }
  if (grads.size() != params_.size()) {
    throw std::invalid_argument("gradient buffer does not match parameters");
  }
  const T* P = params_.data();
  T* G = grads.data();

  // Head and final LayerNorm.
  B::Gemm(true, false, h, v, n, T(1), cache.lnf_out.data(), h, dlogits.data(),
          v, T(1), G + head_w_, v);
  AccumulateColumnSums(dlogits.data(), n, v, G + head_b_);
  std::vector<T> d_ln(nh_sz);
  B::Gemm(false, true, n, h, v, T(1), dlogits.data(), v, P + head_w_, v, T(0),
          d_ln.data(), h);
  std::vector<T> dx(nh_sz, T(0));
  LayerNormBackward(d_ln.data(), cache.lnf_hat.data(), cache.lnf_rstd.data(), n,
                    h, P + lnf_g_, G + lnf_g_, G + lnf_b_, dx.data());

  const T att_scale = T(1) / std::sqrt(static_cast<T>(dh));
  std::vector<T> d_branch(nh_sz);
  std::vector<T> d_act(static_cast<std::size_t>(n) * f);
  std::vector<T> d_pre(static_cast<std::size_t>(n) * f);
  std::vector<T> d_att(nh_sz);
  std::vector<T> d_qkv(static_cast<std::size_t>(n) * 3 * h);
  std::vector<T> d_probs(static_cast<std::size_t>(seq) * seq);

  for (int l = config_.layers - 1; l >= 0; --l) {
    const LayerOffsets& o = layer_off_[static_cast<std::size_t>(l)];
    const auto& c = cache.layers[static_cast<std::size_t>(l)];

    // MLP branch.
    for (std::size_t i = 0; i < nh_sz; ++i) {
      d_branch[i] = c.drop2.empty() ? dx[i] : dx[i] * c.drop2[i];
    }
    B::Gemm(true, false, f, h, n, T(1), c.act.data(), f, d_branch.data(), h,
            T(1), G + o.w_fc2, h);
    AccumulateColumnSums(d_branch.data(), n, h, G + o.b_fc2);
    B::Gemm(false, true, n, f, h, T(1), d_branch.data(), h, P + o.w_fc2, h,
            T(0), d_act.data(), f);
    B::GeluGrad(c.pre_act.data(), d_act.data(), d_pre.data(), d_pre.size());
    B::Gemm(true, false, h, f, n, T(1), c.ln2_out.data(), h, d_pre.data(), f,
            T(1), G + o.w_fc1, f);
    AccumulateColumnSums(d_pre.data(), n, f, G + o.b_fc1);
    B::Gemm(false, true, n, h, f, T(1), d_pre.data(), f, P + o.w_fc1, f, T(0),
            d_ln.data(), h);
    LayerNormBackward(d_ln.data(), c.ln2_hat.data(), c.ln2_rstd.data(), n, h,
                      P + o.ln2_g, G + o.ln2_g, G + o.ln2_b, dx.data());

    // Attention branch.
    for (std::size_t i = 0; i < nh_sz; ++i) {
      d_branch[i] = c.drop1.empty() ? dx[i] : dx[i] * c.drop1[i];
    }
    B::Gemm(true, false, h, h, n, T(1), c.att.data(), h, d_branch.data(), h,
            T(1), G + o.w_o, h);
    AccumulateColumnSums(d_branch.data(), n, h, G + o.b_o);
    B::Gemm(false, true, n, h, h, T(1), d_branch.data(), h, P + o.w_o, h, T(0),
            d_att.data(), h);
    for (int b = 0; b < batch; ++b) {
      const std::size_t qkv_off = static_cast<std::size_t>(b) * seq * 3 * h;
      const T* qkv_b = c.qkv.data() + qkv_off;
      T* dqkv_b = d_qkv.data() + qkv_off;
      for (int hd = 0; hd < nh; ++hd) {
        const T* q = qkv_b + hd * dh;
        const T* k = qkv_b + h + hd * dh;
        const T* val = qkv_b + 2 * h + hd * dh;
        T* dq = dqkv_b + hd * dh;
        T* dk = dqkv_b + h + hd * dh;
        T* dv = dqkv_b + 2 * h + hd * dh;
        const T* pr = c.probs.data() +
                      (static_cast<std::size_t>(b) * nh + hd) * seq * seq;
        const T* d_out =
            d_att.data() + static_cast<std::size_t>(b) * seq * h + hd * dh;
        // dP = dO V^T ; dV = P^T dO
        B::Gemm(false, true, seq, seq, dh, T(1), d_out, h, val, 3 * h, T(0),
                d_probs.data(), seq);
        B::Gemm(true, false, seq, dh, seq, T(1), pr, seq, d_out, h, T(0), dv,
                3 * h);
        // dS = P * (dP - rowsum(dP * P)), then the 1/sqrt(dh) scale.
        for (int r = 0; r < seq; ++r) {
          const T* pr_r = pr + static_cast<std::size_t>(r) * seq;
          T* dp_r = d_probs.data() + static_cast<std::size_t>(r) * seq;
          T dot = 0;
          for (int j = 0; j < seq; ++j) dot += dp_r[j] * pr_r[j];
          for (int j = 0; j < seq; ++j) {
            dp_r[j] = pr_r[j] * (dp_r[j] - dot) * att_scale;
          }
        }
        B::Gemm(false, false, seq, dh, seq, T(1), d_probs.data(), seq, k, 3 * h,
                T(0), dq, 3 * h);
        B::Gemm(true, false, seq, dh, seq, T(1), d_probs.data(), seq, q, 3 * h,
                T(0), dk, 3 * h);
      }
    }
    B::Gemm(true, false, h, 3 * h, n, T(1), c.ln1_out.data(), h, d_qkv.data(),
            3 * h, T(1), G + o.w_qkv, 3 * h);
    AccumulateColumnSums(d_qkv.data(), n, 3 * h, G + o.b_qkv);
    B::Gemm(false, true, n, h, 3 * h, T(1), d_qkv.data(), 3 * h, P + o.w_qkv,
            3 * h, T(0), d_ln.data(), h);
    LayerNormBackward(d_ln.data(), c.ln1_hat.data(), c.ln1_rstd.data(), n, h,
                      P + o.ln1_g, G + o.ln1_g, G + o.ln1_b, dx.data());
  }

  for (int i = 0; i < n; ++i) {
    const T* dxr = dx.data() + static_cast<std::size_t>(i) * h;
    T* gt = G + tok_emb_ + static_cast<std::size_t>(cache.tokens[i]) * h;
    T* gp = G + pos_emb_ + static_cast<std::size_t>(i % seq) * h;
    for (int j = 0; j < h; ++j) {
      gt[j] += dxr[j];
      gp[j] += dxr[j];
    }
  }
}

template class Transformer<float>;
template class Transformer<double>;

}  // namespace cdlm
