/*
 * Copyright 2026 The mrl-workbench Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MRL_ENCODER_HPP_
#define MRL_ENCODER_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mrl {

template <typename Scalar>
using Tensor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One byte per position: nonzero means the position holds a real token.
using AttentionMask = std::vector<std::uint8_t>;

struct EncoderConfig {
  int num_layers = 2;
  int num_heads = 4;
  int model_dim = 64;
  int ffn_dim = 256;
  int max_seq_len = 128;
  int vocab_size = 0;
  double dropout = 0.0;
  bool tie_embeddings = true;

  void validate() const;
  int head_dim() const { return model_dim / num_heads; }
};

template <typename Scalar>
struct LayerParams {
  Tensor<Scalar> wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor<Scalar> ln1_gain, ln1_bias;
  Tensor<Scalar> w1, b1, w2, b2;
  Tensor<Scalar> ln2_gain, ln2_bias;

  template <typename Self, typename F>
  static void visit(Self& self, const std::string& prefix, F&& f) {
    f(prefix + "attn.wq", self.wq);
    f(prefix + "attn.bq", self.bq);
    f(prefix + "attn.wk", self.wk);
    f(prefix + "attn.bk", self.bk);
    f(prefix + "attn.wv", self.wv);
    f(prefix + "attn.bv", self.bv);
    f(prefix + "attn.wo", self.wo);
    f(prefix + "attn.bo", self.bo);
    f(prefix + "ln1.gain", self.ln1_gain);
    f(prefix + "ln1.bias", self.ln1_bias);
    f(prefix + "ffn.w1", self.w1);
    f(prefix + "ffn.b1", self.b1);
    f(prefix + "ffn.w2", self.w2);
    f(prefix + "ffn.b2", self.b2);
    f(prefix + "ln2.gain", self.ln2_gain);
    f(prefix + "ln2.bias", self.ln2_bias);
  }
};

// All trainable tensors of the encoder and its masked-LM output layer. Biases
// and layer-norm vectors are stored as 1 x n rows.
template <typename Scalar>
struct EncoderParams {
  Tensor<Scalar> tok_emb;  // vocab x dim
  Tensor<Scalar> pos_emb;  // max_seq_len x dim
  Tensor<Scalar> emb_ln_gain, emb_ln_bias;
  std::vector<LayerParams<Scalar>> layers;
  Tensor<Scalar> out_weight;  // vocab x dim; empty when tied to tok_emb
  Tensor<Scalar> out_bias;    // 1 x vocab

  // Calls f(name, tensor) in a fixed order; empty tensors are skipped.
  template <typename F>
  void for_each(F&& f) { visit(*this, f); }
  template <typename F>
  void for_each(F&& f) const { visit(*this, f); }

  EncoderParams zeros_like() const;
  void set_zero();
  std::size_t parameter_count() const;

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& f) {
    const auto call = [&f](const std::string& name, auto& t) {
      if (t.size() > 0) f(name, t);
    };
    call("embeddings.token", self.tok_emb);
    call("embeddings.position", self.pos_emb);
    call("embeddings.ln.gain", self.emb_ln_gain);
    call("embeddings.ln.bias", self.emb_ln_bias);
    for (std::size_t i = 0; i < self.layers.size(); ++i) {
      LayerParams<Scalar>::visit(self.layers[i], "layer" + std::to_string(i) + ".", call);
    }
    call("mlm.out_weight", self.out_weight);
    call("mlm.out_bias", self.out_bias);
  }
};

template <typename Scalar>
struct EncoderModel {
  EncoderConfig config;
  EncoderParams<Scalar> params;

  // Output projection used for masked-LM logits.
  const Tensor<Scalar>& output_projection() const {
    return config.tie_embeddings ? params.tok_emb : params.out_weight;
  }
};

template <typename To, typename From>
EncoderModel<To> cast_model(const EncoderModel<From>& model) {
  EncoderModel<To> out;
  out.config = model.config;
  const auto conv = [](const Tensor<From>& t) { return Tensor<To>(t.template cast<To>()); };
  out.params.tok_emb = conv(model.params.tok_emb);
  out.params.pos_emb = conv(model.params.pos_emb);
  out.params.emb_ln_gain = conv(model.params.emb_ln_gain);
  out.params.emb_ln_bias = conv(model.params.emb_ln_bias);
  for (const auto& l : model.params.layers) {
    LayerParams<To> c;
    c.wq = conv(l.wq), c.bq = conv(l.bq), c.wk = conv(l.wk), c.bk = conv(l.bk);
    c.wv = conv(l.wv), c.bv = conv(l.bv), c.wo = conv(l.wo), c.bo = conv(l.bo);
    c.ln1_gain = conv(l.ln1_gain), c.ln1_bias = conv(l.ln1_bias);
    c.w1 = conv(l.w1), c.b1 = conv(l.b1), c.w2 = conv(l.w2), c.b2 = conv(l.b2);
    c.ln2_gain = conv(l.ln2_gain), c.ln2_bias = conv(l.ln2_bias);
    out.params.layers.push_back(std::move(c));
  }
  out.params.out_weight = conv(model.params.out_weight);
  out.params.out_bias = conv(model.params.out_bias);
  return out;
}

// Seeded Gaussian init (std 0.02), layer-norm gain 1 and bias 0, zero biases.
template <typename Scalar>
EncoderModel<Scalar> init_encoder(const EncoderConfig& config, std::uint64_t seed);

// Makes every masked-LM output row uniform: zeroes the output projection and
// bias. With tied embeddings this zeroes the token embeddings.
template <typename Scalar>
void zero_output_projection(EncoderModel<Scalar>& model);

template <typename Scalar>
struct LayerNormCache {
  Tensor<Scalar> xhat;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_std;
};

template <typename Scalar>
struct LayerCache {
  Tensor<Scalar> input, q, k, v, ctx;
  std::vector<Tensor<Scalar>> probs;  // per head, seq x seq
  Tensor<Scalar> attn_drop;           // dropout keep-scale, empty when off
  LayerNormCache<Scalar> ln1;
  Tensor<Scalar> x1, ffn_pre, ffn_act;
  Tensor<Scalar> ffn_drop;
  LayerNormCache<Scalar> ln2;
};

// Activations kept by encode_hidden for backward_hidden.
template <typename Scalar>
struct ForwardCache {
  std::vector<int> ids;
  AttentionMask mask;
  Tensor<Scalar> emb_drop;
  LayerNormCache<Scalar> emb_ln;
  std::vector<LayerCache<Scalar>> layers;
};

// Enables dropout during training; absent means evaluation mode.
struct DropoutContext {
  double rate = 0.0;
  std::uint64_t seed = 0;
};

// Final hidden states (seq x dim). An empty mask means every position attends.
// Throws seq_overflow past max_seq_len.
template <typename Scalar>
Tensor<Scalar> encode_hidden(const EncoderModel<Scalar>& model, std::span<const int> ids, const AttentionMask& mask = {},
                             ForwardCache<Scalar>* cache = nullptr, const DropoutContext* dropout = nullptr);

// Accumulates parameter gradients given dLoss/dHidden.
template <typename Scalar>
void backward_hidden(const EncoderModel<Scalar>& model, const ForwardCache<Scalar>& cache,
                     const Tensor<Scalar>& d_hidden, EncoderParams<Scalar>& grads);

template <typename Scalar>
Tensor<Scalar> mlm_logits(const EncoderModel<Scalar>& model, const Tensor<Scalar>& hidden);

// Logits (seq x vocab) of the masked-LM head.
template <typename Scalar>
Tensor<Scalar> forward(const EncoderModel<Scalar>& model, std::span<const int> ids, const AttentionMask& mask = {});

// Row-wise softmax, computed stably.
template <typename Scalar>
Tensor<Scalar> softmax_rows(const Tensor<Scalar>& logits);

struct MaskedSequence {
  std::vector<int> input_ids;
  std::vector<std::size_t> positions;
  std::vector<int> targets;
};

// Seeded masked-LM corruption. Candidates are positions that are not pad,
// cls or sep; each sequence masks round(fraction * candidates) of them (at
// least one). Chosen positions become [MASK] 80% of the time, a random
// non-special token 10% and stay unchanged 10%.
std::vector<MaskedSequence> make_mlm_batch(std::span<const std::vector<int>> batch, int vocab_size,
                                           double mask_fraction, std::uint64_t seed);

struct MlmLoss {
  double loss = 0.0;
  std::size_t masked_count = 0;
};

// Mean negative log-likelihood of the true tokens at masked positions.
template <typename Scalar>
MlmLoss mlm_loss(const EncoderModel<Scalar>& model, std::span<const MaskedSequence> batch);
template <typename Scalar>
MlmLoss mlm_loss(const EncoderModel<Scalar>& model, std::span<const std::vector<int>> batch, double mask_fraction,
                 std::uint64_t seed);

// Same loss plus its gradient, accumulated into `grads`.
template <typename Scalar>
MlmLoss mlm_loss_and_grad(const EncoderModel<Scalar>& model, std::span<const MaskedSequence> batch,
                          EncoderParams<Scalar>& grads, const DropoutContext* dropout = nullptr);

struct TrainSpec {
  int epochs = 4;
  double learning_rate = 5e-5;
  int batch_size = 128;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double mask_fraction = 0.15;
  std::uint64_t seed = 0;
  int max_steps = 0;  // 0 = run all epochs

  void validate() const;
};

template <typename Scalar>
class AdamOptimizer {
 public:
  explicit AdamOptimizer(const TrainSpec& spec) : spec_(spec) {}

  void step(std::span<Tensor<Scalar>* const> params, std::span<const Tensor<Scalar>* const> grads);
  int steps_taken() const { return t_; }

 private:
  TrainSpec spec_;
  int t_ = 0;
  std::vector<Tensor<Scalar>> m_, v_;
};

template <typename Scalar>
std::vector<Tensor<Scalar>*> tensor_list(EncoderParams<Scalar>& params);
template <typename Scalar>
std::vector<const Tensor<Scalar>*> tensor_list(const EncoderParams<Scalar>& params);

struct LossPoint {
  int step = 0;
  double loss = 0.0;
  std::size_t masked_count = 0;
};

template <typename Scalar>
struct MlmTrainResult {
  EncoderModel<Scalar> model;
  std::vector<LossPoint> curve;
};

// Adam over shuffled mini-batches of framed token sequences. Bit-reproducible
// for a fixed spec. Throws divergence when the loss stops being finite.
template <typename Scalar>
MlmTrainResult<Scalar> train_mlm(EncoderModel<Scalar> model, std::span<const std::vector<int>> sequences,
                                 const TrainSpec& spec,
                                 const std::function<void(const LossPoint&)>& on_step = {});

std::string loss_curve_to_csv(std::span<const LossPoint> curve);

// log p(ids[i] | ids with position i replaced by [MASK]) for every i.
template <typename Scalar>
std::vector<double> pseudo_log_likelihoods(const EncoderModel<Scalar>& model, std::span<const int> ids);

// exp(-mean(log_probs)).
double pseudo_perplexity_from_log_probs(std::span<const double> log_probs);

// Mask-one-out pseudo-perplexity of a non-empty sequence.
template <typename Scalar>
double pseudo_perplexity(const EncoderModel<Scalar>& model, std::span<const int> ids);

struct TokenProbability {
  int token = 0;
  double probability = 0.0;
};

// Top-k predictions at the single [MASK] position, most probable first.
template <typename Scalar>
std::vector<TokenProbability> fill_blank(const EncoderModel<Scalar>& model, std::span<const int> ids, int k);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t sampled = 0;
  std::string worst_parameter;
};

// Compares analytic masked-LM gradients against central differences
// (f(x+e) - f(x-e)) / 2e on `samples` randomly drawn scalars. Relative error is
// |a - n| / max(|a|, |n|, 1e-6).
GradientCheckResult gradient_check(const EncoderModel<double>& model, std::span<const MaskedSequence> batch,
                                   double epsilon, std::size_t samples, std::uint64_t seed);

}  // namespace mrl

#endif  // MRL_ENCODER_HPP_
