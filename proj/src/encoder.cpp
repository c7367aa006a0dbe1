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

#include "mrl/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/core.h>

#include "mrl/common.hpp"
#include "mrl/random.hpp"
#include "mrl/tokenizers.hpp"

namespace mrl {

void EncoderConfig::validate() const {
  if (num_layers < 1 || num_heads < 1 || model_dim < 1 || ffn_dim < 1 || max_seq_len < 1 || vocab_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "encoder dimensions must be positive");
  }
  if (vocab_size <= kNumSpecialTokens) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("vocab_size {} leaves no room beyond the special tokens", vocab_size));
  }
  if (model_dim % num_heads != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("model_dim {} is not divisible by num_heads {}", model_dim, num_heads));
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error(ErrorCode::kInvalidArgument, "dropout must lie in [0, 1)");
}

void TrainSpec::validate() const {
  if (epochs < 1 || batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "epochs and batch_size must be positive");
  if (!(learning_rate >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "learning_rate must be non-negative");
  if (!(mask_fraction > 0.0 && mask_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "mask_fraction must lie in (0, 1)");
  }
  if (max_steps < 0) throw Error(ErrorCode::kInvalidArgument, "max_steps must be non-negative");
}

template <typename Scalar>
EncoderParams<Scalar> EncoderParams<Scalar>::zeros_like() const {
  EncoderParams out = *this;
  out.set_zero();
  return out;
}

template <typename Scalar>
void EncoderParams<Scalar>::set_zero() {
  for_each([](const std::string&, Tensor<Scalar>& t) { t.setZero(); });
}

template <typename Scalar>
std::size_t EncoderParams<Scalar>::parameter_count() const {
  std::size_t n = 0;
  for_each([&n](const std::string&, const Tensor<Scalar>& t) { n += static_cast<std::size_t>(t.size()); });
  return n;
}

namespace {

constexpr double kLayerNormEps = 1e-5;

template <typename Scalar>
Tensor<Scalar> gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng, double stddev) {
  Tensor<Scalar> t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = static_cast<Scalar>(stddev * rng.normal());
  return t;
}

template <typename Scalar>
Tensor<Scalar> row_of(Eigen::Index n, Scalar value) {
  return Tensor<Scalar>::Constant(1, n, value);
}

template <typename Scalar>
Tensor<Scalar> affine(const Tensor<Scalar>& x, const Tensor<Scalar>& w, const Tensor<Scalar>& b) {
  Tensor<Scalar> y = x * w;
  y.rowwise() += b.row(0);
  return y;
}

template <typename Scalar>
Tensor<Scalar> layer_norm(const Tensor<Scalar>& x, const Tensor<Scalar>& gain, const Tensor<Scalar>& bias,
                          LayerNormCache<Scalar>& cache) {
  const Eigen::Index rows = x.rows();
  cache.xhat.resize(rows, x.cols());
  cache.inv_std.resize(rows);
  Tensor<Scalar> y(rows, x.cols());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Scalar mean = x.row(r).mean();
    const auto centered = (x.row(r).array() - mean).eval();
    const Scalar var = centered.square().mean();
    const Scalar inv = Scalar(1) / std::sqrt(var + static_cast<Scalar>(kLayerNormEps));
    cache.inv_std(r) = inv;
    cache.xhat.row(r) = centered * inv;
    y.row(r) = cache.xhat.row(r).cwiseProduct(gain.row(0)) + bias.row(0);
  }
  return y;
}

template <typename Scalar>
Tensor<Scalar> layer_norm_backward(const Tensor<Scalar>& dy, const Tensor<Scalar>& gain,
                                   const LayerNormCache<Scalar>& cache, Tensor<Scalar>& d_gain,
                                   Tensor<Scalar>& d_bias) {
  d_gain += dy.cwiseProduct(cache.xhat).colwise().sum();
  d_bias += dy.colwise().sum();
  Tensor<Scalar> dxhat = dy;
  dxhat.array().rowwise() *= gain.row(0).array();
  Tensor<Scalar> dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const Scalar m1 = dxhat.row(r).mean();
    const Scalar m2 = dxhat.row(r).cwiseProduct(cache.xhat.row(r)).mean();
    dx.row(r) = cache.inv_std(r) * (dxhat.row(r).array() - m1 - cache.xhat.row(r).array() * m2).matrix();
  }
  return dx;
}

// tanh approximation of GELU
template <typename Scalar>
Scalar gelu(Scalar x) {
  const Scalar c = static_cast<Scalar>(0.7978845608028654);
  const Scalar a = static_cast<Scalar>(0.044715);
  return Scalar(0.5) * x * (Scalar(1) + std::tanh(c * (x + a * x * x * x)));
}

template <typename Scalar>
Scalar gelu_grad(Scalar x) {
  const Scalar c = static_cast<Scalar>(0.7978845608028654);
  const Scalar a = static_cast<Scalar>(0.044715);
  const Scalar t = std::tanh(c * (x + a * x * x * x));
  return Scalar(0.5) * (Scalar(1) + t) + Scalar(0.5) * x * (Scalar(1) - t * t) * c * (Scalar(1) + Scalar(3) * a * x * x);
}

template <typename Scalar>
Tensor<Scalar> dropout_mask(Eigen::Index rows, Eigen::Index cols, const DropoutContext& ctx, std::string_view label) {
  Rng rng(derive_seed(ctx.seed, label));
  Tensor<Scalar> keep(rows, cols);
  const Scalar scale = static_cast<Scalar>(1.0 / (1.0 - ctx.rate));
  for (Eigen::Index i = 0; i < keep.size(); ++i) keep.data()[i] = rng.uniform() < ctx.rate ? Scalar(0) : scale;
  return keep;
}

bool dropout_on(const DropoutContext* ctx) { return ctx != nullptr && ctx->rate > 0.0; }

template <typename Scalar>
Tensor<Scalar> log_softmax_rows(const Tensor<Scalar>& logits) {
  Tensor<Scalar> out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const Scalar max = logits.row(r).maxCoeff();
    const Scalar lse = max + std::log((logits.row(r).array() - max).exp().sum());
    out.row(r) = logits.row(r).array() - lse;
  }
  return out;
}

}  // namespace

template <typename Scalar>
EncoderModel<Scalar> init_encoder(const EncoderConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  constexpr double kStd = 0.02;
  const Eigen::Index d = config.model_dim;
  const Eigen::Index f = config.ffn_dim;
  const Eigen::Index v = config.vocab_size;
  EncoderModel<Scalar> model;
  model.config = config;
  auto& p = model.params;
  p.tok_emb = gaussian<Scalar>(v, d, rng, kStd);
  p.pos_emb = gaussian<Scalar>(config.max_seq_len, d, rng, kStd);
  p.emb_ln_gain = row_of<Scalar>(d, 1);
  p.emb_ln_bias = row_of<Scalar>(d, 0);
  for (int l = 0; l < config.num_layers; ++l) {
    LayerParams<Scalar> layer;
    layer.wq = gaussian<Scalar>(d, d, rng, kStd);
    layer.bq = row_of<Scalar>(d, 0);
    layer.wk = gaussian<Scalar>(d, d, rng, kStd);
    layer.bk = row_of<Scalar>(d, 0);
    layer.wv = gaussian<Scalar>(d, d, rng, kStd);
    layer.bv = row_of<Scalar>(d, 0);
    layer.wo = gaussian<Scalar>(d, d, rng, kStd);
    layer.bo = row_of<Scalar>(d, 0);
    layer.ln1_gain = row_of<Scalar>(d, 1);
    layer.ln1_bias = row_of<Scalar>(d, 0);
    layer.w1 = gaussian<Scalar>(d, f, rng, kStd);
    layer.b1 = row_of<Scalar>(f, 0);
    layer.w2 = gaussian<Scalar>(f, d, rng, kStd);
    layer.b2 = row_of<Scalar>(d, 0);
    layer.ln2_gain = row_of<Scalar>(d, 1);
    layer.ln2_bias = row_of<Scalar>(d, 0);
    p.layers.push_back(std::move(layer));
  }
  if (!config.tie_embeddings) p.out_weight = gaussian<Scalar>(v, d, rng, kStd);
  p.out_bias = row_of<Scalar>(v, 0);
  return model;
}

template <typename Scalar>
void zero_output_projection(EncoderModel<Scalar>& model) {
  if (model.config.tie_embeddings) {
    model.params.tok_emb.setZero();
  } else {
    model.params.out_weight.setZero();
  }
  model.params.out_bias.setZero();
}

template <typename Scalar>
Tensor<Scalar> encode_hidden(const EncoderModel<Scalar>& model, std::span<const int> ids, const AttentionMask& mask,
                             ForwardCache<Scalar>* cache, const DropoutContext* dropout) {
  const auto& cfg = model.config;
  const auto& p = model.params;
  const Eigen::Index seq = static_cast<Eigen::Index>(ids.size());
  const Eigen::Index d = cfg.model_dim;
  if (seq > cfg.max_seq_len) {
    throw Error(ErrorCode::kSeqOverflow, fmt::format("sequence length {} exceeds max_seq_len {}", seq, cfg.max_seq_len));
  }
  if (!mask.empty() && mask.size() != ids.size()) {
    throw Error(ErrorCode::kInvalidArgument, "attention mask length differs from sequence length");
  }
  if (seq == 0) return Tensor<Scalar>(0, d);
  if (!mask.empty() && std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; })) {
    throw Error(ErrorCode::kInvalidArgument, "attention mask has no real token");
  }

  ForwardCache<Scalar> local;
  ForwardCache<Scalar>& c = cache != nullptr ? *cache : local;
  c.ids.assign(ids.begin(), ids.end());
  c.mask = mask;
  c.layers.assign(static_cast<std::size_t>(cfg.num_layers), {});

  Tensor<Scalar> x(seq, d);
  for (Eigen::Index t = 0; t < seq; ++t) {
    const int id = ids[static_cast<std::size_t>(t)];
    if (id < 0 || id >= cfg.vocab_size) throw Error(ErrorCode::kInvalidArgument, fmt::format("token id {} out of range", id));
    x.row(t) = p.tok_emb.row(id) + p.pos_emb.row(t);
  }
  if (dropout_on(dropout)) {
    c.emb_drop = dropout_mask<Scalar>(seq, d, *dropout, "emb");
    x = x.cwiseProduct(c.emb_drop);
  }
  Tensor<Scalar> h = layer_norm(x, p.emb_ln_gain, p.emb_ln_bias, c.emb_ln);

  const int heads = cfg.num_heads;
  const Eigen::Index hd = cfg.head_dim();
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(hd));
  const Scalar neg_inf = -std::numeric_limits<Scalar>::infinity();

  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& lp = p.layers[l];
    auto& lc = c.layers[l];
    lc.input = h;
    lc.q = affine(h, lp.wq, lp.bq);
    lc.k = affine(h, lp.wk, lp.bk);
    lc.v = affine(h, lp.wv, lp.bv);
    lc.ctx.resize(seq, d);
    lc.probs.resize(static_cast<std::size_t>(heads));
    for (int hh = 0; hh < heads; ++hh) {
      Tensor<Scalar> scores = lc.q.middleCols(hh * hd, hd) * lc.k.middleCols(hh * hd, hd).transpose() * scale;
      if (!mask.empty()) {
        for (Eigen::Index j = 0; j < seq; ++j) {
          if (mask[static_cast<std::size_t>(j)] == 0) scores.col(j).setConstant(neg_inf);
        }
      }
      lc.probs[static_cast<std::size_t>(hh)] = softmax_rows(scores);
      lc.ctx.middleCols(hh * hd, hd) = lc.probs[static_cast<std::size_t>(hh)] * lc.v.middleCols(hh * hd, hd);
    }
    Tensor<Scalar> attn = affine(lc.ctx, lp.wo, lp.bo);
    if (dropout_on(dropout)) {
      lc.attn_drop = dropout_mask<Scalar>(seq, d, *dropout, fmt::format("attn{}", l));
      attn = attn.cwiseProduct(lc.attn_drop);
    }
    lc.x1 = layer_norm(Tensor<Scalar>(h + attn), lp.ln1_gain, lp.ln1_bias, lc.ln1);
    lc.ffn_pre = affine(lc.x1, lp.w1, lp.b1);
    lc.ffn_act = lc.ffn_pre.unaryExpr([](Scalar v) { return gelu(v); });
    Tensor<Scalar> ffn = affine(lc.ffn_act, lp.w2, lp.b2);
    if (dropout_on(dropout)) {
      lc.ffn_drop = dropout_mask<Scalar>(seq, d, *dropout, fmt::format("ffn{}", l));
      ffn = ffn.cwiseProduct(lc.ffn_drop);
    }
    h = layer_norm(Tensor<Scalar>(lc.x1 + ffn), lp.ln2_gain, lp.ln2_bias, lc.ln2);
  }
  return h;
}

template <typename Scalar>
void backward_hidden(const EncoderModel<Scalar>& model, const ForwardCache<Scalar>& cache,
                     const Tensor<Scalar>& d_hidden, EncoderParams<Scalar>& grads) {
  const auto& cfg = model.config;
  const auto& p = model.params;
  const Eigen::Index seq = static_cast<Eigen::Index>(cache.ids.size());
  if (seq == 0) return;
  const int heads = cfg.num_heads;
  const Eigen::Index hd = cfg.head_dim();
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(hd));

  Tensor<Scalar> dh = d_hidden;
  for (std::size_t li = p.layers.size(); li-- > 0;) {
    const auto& lp = p.layers[li];
    const auto& lc = cache.layers[li];
    auto& lg = grads.layers[li];

    Tensor<Scalar> d_res2 = layer_norm_backward(dh, lp.ln2_gain, lc.ln2, lg.ln2_gain, lg.ln2_bias);
    Tensor<Scalar> d_ffn = d_res2;
    if (lc.ffn_drop.size() > 0) d_ffn = d_ffn.cwiseProduct(lc.ffn_drop);
    lg.w2.noalias() += lc.ffn_act.transpose() * d_ffn;
    lg.b2 += d_ffn.colwise().sum();
    Tensor<Scalar> d_pre = d_ffn * lp.w2.transpose();
    d_pre = d_pre.cwiseProduct(lc.ffn_pre.unaryExpr([](Scalar v) { return gelu_grad(v); }));
    lg.w1.noalias() += lc.x1.transpose() * d_pre;
    lg.b1 += d_pre.colwise().sum();
    Tensor<Scalar> d_x1 = d_res2;
    d_x1.noalias() += d_pre * lp.w1.transpose();

    Tensor<Scalar> d_res1 = layer_norm_backward(d_x1, lp.ln1_gain, lc.ln1, lg.ln1_gain, lg.ln1_bias);
    Tensor<Scalar> d_attn = d_res1;
    if (lc.attn_drop.size() > 0) d_attn = d_attn.cwiseProduct(lc.attn_drop);
    lg.wo.noalias() += lc.ctx.transpose() * d_attn;
    lg.bo += d_attn.colwise().sum();
    const Tensor<Scalar> d_ctx = d_attn * lp.wo.transpose();

    Tensor<Scalar> dq(seq, cfg.model_dim), dk(seq, cfg.model_dim), dv(seq, cfg.model_dim);
    for (int hh = 0; hh < heads; ++hh) {
      const auto& probs = lc.probs[static_cast<std::size_t>(hh)];
      const auto d_ch = d_ctx.middleCols(hh * hd, hd);
      const Tensor<Scalar> d_probs = d_ch * lc.v.middleCols(hh * hd, hd).transpose();
      dv.middleCols(hh * hd, hd) = probs.transpose() * d_ch;
      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> row_dot = d_probs.cwiseProduct(probs).rowwise().sum();
      Tensor<Scalar> d_scores = probs.cwiseProduct((d_probs.colwise() - row_dot));
      d_scores *= scale;
      dq.middleCols(hh * hd, hd) = d_scores * lc.k.middleCols(hh * hd, hd);
      dk.middleCols(hh * hd, hd) = d_scores.transpose() * lc.q.middleCols(hh * hd, hd);
    }
    lg.wq.noalias() += lc.input.transpose() * dq;
    lg.bq += dq.colwise().sum();
    lg.wk.noalias() += lc.input.transpose() * dk;
    lg.bk += dk.colwise().sum();
    lg.wv.noalias() += lc.input.transpose() * dv;
    lg.bv += dv.colwise().sum();

    dh = d_res1;
    dh.noalias() += dq * lp.wq.transpose();
    dh.noalias() += dk * lp.wk.transpose();
    dh.noalias() += dv * lp.wv.transpose();
  }

  Tensor<Scalar> dx = layer_norm_backward(dh, p.emb_ln_gain, cache.emb_ln, grads.emb_ln_gain, grads.emb_ln_bias);
  if (cache.emb_drop.size() > 0) dx = dx.cwiseProduct(cache.emb_drop);
  for (Eigen::Index t = 0; t < seq; ++t) {
    grads.tok_emb.row(cache.ids[static_cast<std::size_t>(t)]) += dx.row(t);
    grads.pos_emb.row(t) += dx.row(t);
  }
}

template <typename Scalar>
Tensor<Scalar> softmax_rows(const Tensor<Scalar>& logits) {
  Tensor<Scalar> out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const Scalar max = logits.row(r).maxCoeff();
    if (!std::isfinite(max)) {
      out.row(r).setZero();
      continue;
    }
    out.row(r) = (logits.row(r).array() - max).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> mlm_logits(const EncoderModel<Scalar>& model, const Tensor<Scalar>& hidden) {
  Tensor<Scalar> logits = hidden * model.output_projection().transpose();
  logits.rowwise() += model.params.out_bias.row(0);
  return logits;
}

template <typename Scalar>
Tensor<Scalar> forward(const EncoderModel<Scalar>& model, std::span<const int> ids, const AttentionMask& mask) {
  return mlm_logits(model, encode_hidden(model, ids, mask));
}

std::vector<MaskedSequence> make_mlm_batch(std::span<const std::vector<int>> batch, int vocab_size,
                                           double mask_fraction, std::uint64_t seed) {
  if (batch.empty()) throw Error(ErrorCode::kInvalidArgument, "empty masked-LM batch");
  Rng rng(seed);
  std::vector<MaskedSequence> out;
  out.reserve(batch.size());
  std::size_t total = 0;
  for (const auto& ids : batch) {
    MaskedSequence ms;
    ms.input_ids = ids;
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] != kPadId && ids[i] != kClsId && ids[i] != kSepId) candidates.push_back(i);
    }
    if (!candidates.empty()) {
      const auto wanted = static_cast<std::size_t>(std::llround(mask_fraction * static_cast<double>(candidates.size())));
      const std::size_t n = std::clamp<std::size_t>(wanted, 1, candidates.size());
      for (std::size_t i = 0; i < n; ++i) {
        std::swap(candidates[i], candidates[i + rng.index(candidates.size() - i)]);
      }
      candidates.resize(n);
      std::sort(candidates.begin(), candidates.end());
      for (std::size_t pos : candidates) {
        ms.positions.push_back(pos);
        ms.targets.push_back(ids[pos]);
        const double r = rng.uniform();
        if (r < 0.8) {
          ms.input_ids[pos] = kMaskId;
        } else if (r < 0.9) {
          ms.input_ids[pos] = vocab_size > kNumSpecialTokens
                                  ? kNumSpecialTokens + static_cast<int>(rng.index(static_cast<std::size_t>(vocab_size - kNumSpecialTokens)))
                                  : kMaskId;
        }
      }
    }
    total += ms.positions.size();
    out.push_back(std::move(ms));
  }
  if (total == 0) throw Error(ErrorCode::kInvalidArgument, "batch has no maskable position");
  return out;
}

namespace {

template <typename Scalar>
Tensor<Scalar> gather_rows(const Tensor<Scalar>& x, std::span<const std::size_t> rows) {
  Tensor<Scalar> out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

template <typename Scalar>
MlmLoss mlm_loss_impl(const EncoderModel<Scalar>& model, std::span<const MaskedSequence> batch,
                      EncoderParams<Scalar>* grads, const DropoutContext* dropout) {
  std::size_t total = 0;
  for (const auto& ms : batch) total += ms.positions.size();
  if (total == 0) throw Error(ErrorCode::kInvalidArgument, "batch has no masked position");
  const Scalar inv_total = Scalar(1) / static_cast<Scalar>(total);

  double nll = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto& ms = batch[s];
    if (ms.positions.empty()) continue;
    ForwardCache<Scalar> cache;
    DropoutContext seq_dropout;
    if (dropout != nullptr) seq_dropout = {dropout->rate, derive_seed(dropout->seed, s)};
    const Tensor<Scalar> hidden =
        encode_hidden(model, ms.input_ids, {}, grads != nullptr ? &cache : nullptr, dropout != nullptr ? &seq_dropout : nullptr);
    const Tensor<Scalar> picked = gather_rows(hidden, ms.positions);
    const Tensor<Scalar> logits = mlm_logits(model, picked);
    const Tensor<Scalar> log_probs = log_softmax_rows(logits);
    for (std::size_t i = 0; i < ms.positions.size(); ++i) {
      nll -= static_cast<double>(log_probs(static_cast<Eigen::Index>(i), ms.targets[i]));
    }
    if (grads == nullptr) continue;

    Tensor<Scalar> d_logits = log_probs.array().exp();
    for (std::size_t i = 0; i < ms.positions.size(); ++i) d_logits(static_cast<Eigen::Index>(i), ms.targets[i]) -= Scalar(1);
    d_logits *= inv_total;
    grads->out_bias += d_logits.colwise().sum();
    Tensor<Scalar>& d_proj = model.config.tie_embeddings ? grads->tok_emb : grads->out_weight;
    d_proj.noalias() += d_logits.transpose() * picked;
    const Tensor<Scalar> d_picked = d_logits * model.output_projection();
    Tensor<Scalar> d_hidden = Tensor<Scalar>::Zero(hidden.rows(), hidden.cols());
    for (std::size_t i = 0; i < ms.positions.size(); ++i) {
      d_hidden.row(static_cast<Eigen::Index>(ms.positions[i])) += d_picked.row(static_cast<Eigen::Index>(i));
    }
    backward_hidden(model, cache, d_hidden, *grads);
  }
  return {nll / static_cast<double>(total), total};
}

}  // namespace

template <typename Scalar>
MlmLoss mlm_loss(const EncoderModel<Scalar>& model, std::span<const MaskedSequence> batch) {
  return mlm_loss_impl<Scalar>(model, batch, nullptr, nullptr);
}

template <typename Scalar>
MlmLoss mlm_loss(const EncoderModel<Scalar>& model, std::span<const std::vector<int>> batch, double mask_fraction,
                 std::uint64_t seed) {
  const auto masked = make_mlm_batch(batch, model.config.vocab_size, mask_fraction, seed);
  return mlm_loss(model, std::span<const MaskedSequence>(masked));
}

template <typename Scalar>
MlmLoss mlm_loss_and_grad(const EncoderModel<Scalar>& model, std::span<const MaskedSequence> batch,
                          EncoderParams<Scalar>& grads, const DropoutContext* dropout) {
  return mlm_loss_impl<Scalar>(model, batch, &grads, dropout);
}

template <typename Scalar>
void AdamOptimizer<Scalar>::step(std::span<Tensor<Scalar>* const> params, std::span<const Tensor<Scalar>* const> grads) {
  if (params.size() != grads.size()) throw Error(ErrorCode::kInvalidArgument, "parameter and gradient lists differ");
  if (m_.empty()) {
    for (const auto* p : params) {
      m_.push_back(Tensor<Scalar>::Zero(p->rows(), p->cols()));
      v_.push_back(Tensor<Scalar>::Zero(p->rows(), p->cols()));
    }
  }
  ++t_;
  const Scalar b1 = static_cast<Scalar>(spec_.beta1);
  const Scalar b2 = static_cast<Scalar>(spec_.beta2);
  const Scalar lr = static_cast<Scalar>(spec_.learning_rate);
  const Scalar eps = static_cast<Scalar>(spec_.epsilon);
  const Scalar c1 = Scalar(1) - static_cast<Scalar>(std::pow(spec_.beta1, t_));
  const Scalar c2 = Scalar(1) - static_cast<Scalar>(std::pow(spec_.beta2, t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& g = *grads[i];
    m_[i] = b1 * m_[i] + (Scalar(1) - b1) * g;
    v_[i] = b2 * v_[i] + (Scalar(1) - b2) * g.cwiseProduct(g);
    params[i]->array() -= lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps);
  }
}

template <typename Scalar>
std::vector<Tensor<Scalar>*> tensor_list(EncoderParams<Scalar>& params) {
  std::vector<Tensor<Scalar>*> out;
  params.for_each([&out](const std::string&, Tensor<Scalar>& t) { out.push_back(&t); });
  return out;
}

template <typename Scalar>
std::vector<const Tensor<Scalar>*> tensor_list(const EncoderParams<Scalar>& params) {
  std::vector<const Tensor<Scalar>*> out;
  params.for_each([&out](const std::string&, const Tensor<Scalar>& t) { out.push_back(&t); });
  return out;
}

template <typename Scalar>
MlmTrainResult<Scalar> train_mlm(EncoderModel<Scalar> model, std::span<const std::vector<int>> sequences,
                                 const TrainSpec& spec, const std::function<void(const LossPoint&)>& on_step) {
  spec.validate();
  if (sequences.empty()) throw Error(ErrorCode::kEmptyInput, "no training sequences");
  MlmTrainResult<Scalar> result;
  AdamOptimizer<Scalar> adam(spec);
  EncoderParams<Scalar> grads = model.params.zeros_like();
  const auto param_ptrs = tensor_list(model.params);
  const auto grad_ptrs = tensor_list(std::as_const(grads));

  std::vector<std::size_t> order(sequences.size());
  int step = 0;
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(spec.seed, fmt::format("epoch{}", epoch)));
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(spec.batch_size)) {
      if (spec.max_steps > 0 && step >= spec.max_steps) break;
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(spec.batch_size));
      std::vector<std::vector<int>> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(sequences[order[i]]);
      const std::uint64_t step_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(step));
      const auto masked = make_mlm_batch(batch, model.config.vocab_size, spec.mask_fraction, step_seed);
      grads.set_zero();
      const DropoutContext dropout{model.config.dropout, derive_seed(step_seed, "dropout")};
      const MlmLoss loss = mlm_loss_and_grad(model, std::span<const MaskedSequence>(masked), grads,
                                             model.config.dropout > 0.0 ? &dropout : nullptr);
      if (!std::isfinite(loss.loss)) {
        throw Error(ErrorCode::kDivergence, fmt::format("masked-LM loss is not finite at step {}", step));
      }
      adam.step(param_ptrs, grad_ptrs);
      for (const auto* t : param_ptrs) {
        if (!t->allFinite()) throw Error(ErrorCode::kDivergence, fmt::format("non-finite parameters after step {}", step));
      }
      const LossPoint point{step, loss.loss, loss.masked_count};
      result.curve.push_back(point);
      if (on_step) on_step(point);
      ++step;
    }
    if (spec.max_steps > 0 && step >= spec.max_steps) break;
  }
  result.model = std::move(model);
  return result;
}

std::string loss_curve_to_csv(std::span<const LossPoint> curve) {
  std::string out = "step,loss,masked_count\n";
  for (const auto& p : curve) out += fmt::format("{},{:.9g},{}\n", p.step, p.loss, p.masked_count);
  return out;
}

template <typename Scalar>
std::vector<double> pseudo_log_likelihoods(const EncoderModel<Scalar>& model, std::span<const int> ids) {
  std::vector<double> out;
  out.reserve(ids.size());
  std::vector<int> probe(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    probe[i] = kMaskId;
    const Tensor<Scalar> hidden = encode_hidden(model, probe);
    const std::size_t pos[] = {i};
    const Tensor<Scalar> log_probs = log_softmax_rows(mlm_logits(model, gather_rows(hidden, std::span<const std::size_t>(pos))));
    out.push_back(static_cast<double>(log_probs(0, ids[i])));
    probe[i] = ids[i];
  }
  return out;
}

double pseudo_perplexity_from_log_probs(std::span<const double> log_probs) {
  if (log_probs.empty()) throw Error(ErrorCode::kInvalidArgument, "pseudo-perplexity of an empty sequence");
  const double sum = std::accumulate(log_probs.begin(), log_probs.end(), 0.0);
  return std::exp(-sum / static_cast<double>(log_probs.size()));
}

template <typename Scalar>
double pseudo_perplexity(const EncoderModel<Scalar>& model, std::span<const int> ids) {
  const auto lls = pseudo_log_likelihoods(model, ids);
  return pseudo_perplexity_from_log_probs(lls);
}

template <typename Scalar>
std::vector<TokenProbability> fill_blank(const EncoderModel<Scalar>& model, std::span<const int> ids, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
  const auto masks = std::count(ids.begin(), ids.end(), kMaskId);
  if (masks != 1) throw Error(ErrorCode::kInvalidArgument, fmt::format("expected exactly one mask, found {}", masks));
  const std::size_t pos[] = {static_cast<std::size_t>(std::find(ids.begin(), ids.end(), kMaskId) - ids.begin())};
  const Tensor<Scalar> hidden = encode_hidden(model, ids);
  const Tensor<Scalar> probs = softmax_rows(Tensor<Scalar>(mlm_logits(model, gather_rows(hidden, std::span<const std::size_t>(pos)))));
  std::vector<TokenProbability> all;
  all.reserve(static_cast<std::size_t>(probs.cols()));
  for (Eigen::Index j = 0; j < probs.cols(); ++j) all.push_back({static_cast<int>(j), static_cast<double>(probs(0, j))});
  const auto top = std::min<std::size_t>(static_cast<std::size_t>(k), all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(top), all.end(), [](const auto& a, const auto& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.token < b.token;
  });
  all.resize(top);
  return all;
}

GradientCheckResult gradient_check(const EncoderModel<double>& model, std::span<const MaskedSequence> batch,
                                   double epsilon, std::size_t samples, std::uint64_t seed) {
  EncoderParams<double> grads = model.params.zeros_like();
  mlm_loss_and_grad(model, batch, grads);

  EncoderModel<double> probe = model;
  auto params = tensor_list(probe.params);
  const auto analytic = tensor_list(std::as_const(grads));
  std::vector<std::string> names;
  probe.params.for_each([&names](const std::string& name, const Tensor<double>&) { names.push_back(name); });

  std::vector<std::pair<std::size_t, Eigen::Index>> coords;
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (Eigen::Index i = 0; i < params[t]->size(); ++i) coords.emplace_back(t, i);
  }
  Rng rng(seed);
  const std::size_t n = std::min(samples, coords.size());
  for (std::size_t i = 0; i < n; ++i) std::swap(coords[i], coords[i + rng.index(coords.size() - i)]);
  coords.resize(n);

  GradientCheckResult result;
  result.sampled = n;
  for (const auto& [t, i] : coords) {
    double& x = params[t]->data()[i];
    const double saved = x;
    x = saved + epsilon;
    const double up = mlm_loss(probe, batch).loss;
    x = saved - epsilon;
    const double down = mlm_loss(probe, batch).loss;
    x = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double exact = analytic[t]->data()[i];
    const double rel = std::abs(exact - numeric) / std::max({std::abs(exact), std::abs(numeric), 1e-6});
    if (rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_parameter = fmt::format("{}[{}]", names[t], i);
    }
  }
  return result;
}

#define MRL_INSTANTIATE_ENCODER(S)                                                                                   \
  template struct EncoderParams<S>;                                                                                  \
  template class AdamOptimizer<S>;                                                                                   \
  template EncoderModel<S> init_encoder<S>(const EncoderConfig&, std::uint64_t);                                     \
  template void zero_output_projection<S>(EncoderModel<S>&);                                                         \
  template Tensor<S> encode_hidden<S>(const EncoderModel<S>&, std::span<const int>, const AttentionMask&,           \
                                      ForwardCache<S>*, const DropoutContext*);                                      \
  template void backward_hidden<S>(const EncoderModel<S>&, const ForwardCache<S>&, const Tensor<S>&,                \
                                   EncoderParams<S>&);                                                               \
  template Tensor<S> mlm_logits<S>(const EncoderModel<S>&, const Tensor<S>&);                                        \
  template Tensor<S> forward<S>(const EncoderModel<S>&, std::span<const int>, const AttentionMask&);                 \
  template Tensor<S> softmax_rows<S>(const Tensor<S>&);                                                              \
  template MlmLoss mlm_loss<S>(const EncoderModel<S>&, std::span<const MaskedSequence>);                             \
  template MlmLoss mlm_loss<S>(const EncoderModel<S>&, std::span<const std::vector<int>>, double, std::uint64_t);    \
  template MlmLoss mlm_loss_and_grad<S>(const EncoderModel<S>&, std::span<const MaskedSequence>, EncoderParams<S>&,   \
                                       const DropoutContext*);                                                       \
  template std::vector<Tensor<S>*> tensor_list<S>(EncoderParams<S>&);                                                \
  template std::vector<const Tensor<S>*> tensor_list<S>(const EncoderParams<S>&);                                    \
  template MlmTrainResult<S> train_mlm<S>(EncoderModel<S>, std::span<const std::vector<int>>, const TrainSpec&,      \
                                          const std::function<void(const LossPoint&)>&);                             \
  template std::vector<double> pseudo_log_likelihoods<S>(const EncoderModel<S>&, std::span<const int>);              \
  template double pseudo_perplexity<S>(const EncoderModel<S>&, std::span<const int>);                                \
  template std::vector<TokenProbability> fill_blank<S>(const EncoderModel<S>&, std::span<const int>, int);

MRL_INSTANTIATE_ENCODER(float)
MRL_INSTANTIATE_ENCODER(double)

#undef MRL_INSTANTIATE_ENCODER

}  // namespace mrl
