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

#include <cmath>
#include <cstring>
#include <numeric>
#include <set>

#include "doctest.h"
#include "mrl/checkpoint.hpp"
#include "mrl/common.hpp"
#include "mrl/encoder.hpp"
#include "mrl/random.hpp"
#include "mrl/tokenizers.hpp"
#include "support.hpp"

using namespace mrl;

namespace {

EncoderConfig tiny_config(int vocab = 12) {
  EncoderConfig c;
  c.num_layers = 2;
  c.num_heads = 2;
  c.model_dim = 8;
  c.ffn_dim = 16;
  c.max_seq_len = 10;
  c.vocab_size = vocab;
  return c;
}

std::vector<int> random_sequence(Rng& rng, int length, int vocab) {
  std::vector<int> ids{kClsId};
  for (int i = 0; i < length; ++i) ids.push_back(kNumSpecialTokens + static_cast<int>(rng.index(vocab - kNumSpecialTokens)));
  ids.push_back(kSepId);
  return ids;
}

}  // namespace

TEST_CASE("softmax rows match a direct evaluation and survive large logits") {
  Tensor<double> logits(2, 3);
  logits << 1.0, 2.0, 3.0, 1000.0, 1001.0, 999.0;
  const auto p = softmax_rows(logits);
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  CHECK(p(0, 2) == doctest::Approx(std::exp(3.0) / z).epsilon(1e-12));
  const double z2 = std::exp(0.0) + std::exp(1.0) + std::exp(-1.0);
  CHECK(p(1, 1) == doctest::Approx(std::exp(1.0) / z2).epsilon(1e-12));
  for (int r = 0; r < 2; ++r) CHECK(p.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("forward shapes and sequence overflow") {
  const auto model = init_encoder<float>(tiny_config(), 1);
  const std::vector<int> ids{kClsId, 6, 7, kSepId};
  const auto logits = forward(model, ids);
  CHECK(logits.rows() == 4);
  CHECK(logits.cols() == 12);
  const std::vector<int> long_ids(11, 6);
  try {
    forward(model, long_ids);
    FAIL("expected an overflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSeqOverflow);
  }
}

TEST_CASE("float and double encoders agree") {
  const auto d = init_encoder<double>(tiny_config(), 4);
  const auto f = cast_model<float>(d);
  const std::vector<int> ids{kClsId, 5, 9, 11, kSepId};
  const auto ld = forward(d, ids);
  const auto lf = forward(f, ids);
  CHECK((ld - lf.cast<double>()).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("padding behind the mask does not change real positions") {
  const auto model = init_encoder<double>(tiny_config(), 2);
  const std::vector<int> ids{kClsId, 6, 7, 8, kSepId};
  std::vector<int> padded = ids;
  padded.insert(padded.end(), 3, kPadId);
  AttentionMask mask(padded.size(), 1);
  std::fill(mask.begin() + 5, mask.end(), 0);
  const auto a = encode_hidden(model, ids);
  const auto b = encode_hidden(model, padded, mask);
  CHECK((a - b.topRows(5)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("masking never touches special tokens and masks at least one position") {
  Rng rng(5);
  std::vector<std::vector<int>> batch;
  for (int i = 0; i < 50; ++i) batch.push_back(random_sequence(rng, 1 + static_cast<int>(rng.index(7)), 30));
  const auto masked = make_mlm_batch(batch, 30, 0.15, 9);
  REQUIRE(masked.size() == batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& m = masked[i];
    const std::size_t candidates = batch[i].size() - 2;
    CHECK(m.positions.size() == std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.15 * candidates))));
    for (std::size_t j = 0; j < m.positions.size(); ++j) {
      const auto pos = m.positions[j];
      CHECK(pos > 0);
      CHECK(pos < batch[i].size() - 1);
      CHECK(m.targets[j] == batch[i][pos]);
      CHECK((!is_special_id(m.input_ids[pos]) || m.input_ids[pos] == kMaskId));
    }
  }
  const auto again = make_mlm_batch(batch, 30, 0.15, 9);
  for (std::size_t i = 0; i < batch.size(); ++i) CHECK(again[i].input_ids == masked[i].input_ids);
}

TEST_CASE("mask corruption follows the 80/10/10 split") {
  std::vector<std::vector<int>> batch(400, std::vector<int>{kClsId});
  for (auto& s : batch) {
    for (int i = 0; i < 20; ++i) s.push_back(10 + i);
    s.push_back(kSepId);
  }
  const auto masked = make_mlm_batch(batch, 40, 0.5, 3);
  long mask = 0, same = 0, other = 0;
  for (const auto& m : masked) {
    for (std::size_t j = 0; j < m.positions.size(); ++j) {
      const int got = m.input_ids[m.positions[j]];
      if (got == kMaskId) ++mask;
      else if (got == m.targets[j]) ++same;
      else ++other;
    }
  }
  const double n = static_cast<double>(mask + same + other);
  CHECK(mask / n == doctest::Approx(0.8).epsilon(0.03));
  CHECK(other / n == doctest::Approx(0.1).epsilon(0.2));
  // Random replacements can land on the true token.
  CHECK(same / n == doctest::Approx(0.1 + 0.1 / 35.0).epsilon(0.2));
}

TEST_CASE("uniform output gives log V loss and V pseudo-perplexity") {
  auto model = init_encoder<double>(tiny_config(20), 3);
  zero_output_projection(model);
  Rng rng(1);
  std::vector<std::vector<int>> batch;
  for (int i = 0; i < 5; ++i) batch.push_back(random_sequence(rng, 6, 20));
  CHECK(mlm_loss(model, batch, 0.3, 2).loss == doctest::Approx(std::log(20.0)).epsilon(1e-12));
  CHECK(pseudo_perplexity(model, batch[0]) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("pseudo-perplexity is exp of the negative mean log probability") {
  const std::vector<double> lp{std::log(0.5), std::log(0.25), std::log(0.125)};
  CHECK(std::abs(pseudo_perplexity_from_log_probs(lp) - 4.0) < 1e-12);
  CHECK_THROWS_AS(pseudo_perplexity_from_log_probs(std::vector<double>{}), Error);
}

TEST_CASE("analytic gradients match central differences") {
  Rng rng(7);
  const auto model = init_encoder<double>(tiny_config(), 11);
  std::vector<std::vector<int>> seqs;
  for (int i = 0; i < 3; ++i) seqs.push_back(random_sequence(rng, 5, 12));
  const auto batch = make_mlm_batch(seqs, 12, 0.3, 4);
  const auto r = gradient_check(model, batch, 1e-5, 600, 13);
  CHECK(r.sampled == 600);
  CHECK(r.max_relative_error < 1e-3);
}

TEST_CASE("adam takes a learning-rate sized first step") {
  TrainSpec spec;
  spec.learning_rate = 0.1;
  AdamOptimizer<double> adam(spec);
  Tensor<double> w(1, 2), g(1, 2);
  w << 1.0, -1.0;
  g << 0.5, -2.0;
  Tensor<double>* ps[] = {&w};
  const Tensor<double>* gs[] = {&g};
  adam.step(ps, gs);
  // First step: m_hat = g, v_hat = g^2, update = lr * g / (|g| + eps).
  CHECK(w(0, 0) == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-12));
  CHECK(w(0, 1) == doctest::Approx(-1.0 + 0.1 * 2.0 / (2.0 + 1e-8)).epsilon(1e-12));
  CHECK(adam.steps_taken() == 1);
}

TEST_CASE("masked-LM training is reproducible and lowers the loss") {
  Rng rng(2);
  std::vector<std::vector<int>> seqs;
  for (int i = 0; i < 16; ++i) seqs.push_back(random_sequence(rng, 6, 12));
  TrainSpec spec;
  spec.epochs = 30;
  spec.learning_rate = 1e-2;
  spec.batch_size = 8;
  spec.seed = 3;
  const auto a = train_mlm(init_encoder<float>(tiny_config(), 1), seqs, spec);
  const auto b = train_mlm(init_encoder<float>(tiny_config(), 1), seqs, spec);
  REQUIRE(a.curve.size() == 60);
  for (std::size_t i = 0; i < a.curve.size(); ++i) CHECK(a.curve[i].loss == b.curve[i].loss);
  const auto mean = [](auto first, auto last) {
    double s = 0;
    for (auto it = first; it != last; ++it) s += it->loss;
    return s / static_cast<double>(last - first);
  };
  CHECK(mean(a.curve.end() - 10, a.curve.end()) < mean(a.curve.begin(), a.curve.begin() + 10));
  spec.max_steps = 5;
  CHECK(train_mlm(init_encoder<float>(tiny_config(), 1), seqs, spec).curve.size() == 5);
}

TEST_CASE("fill_blank ranks by probability") {
  const auto model = init_encoder<float>(tiny_config(), 5);
  const std::vector<int> ids{kClsId, 6, kMaskId, 8, kSepId};
  const auto top = fill_blank(model, ids, 4);
  REQUIRE(top.size() == 4);
  double total = 0.0;
  for (std::size_t i = 0; i < top.size(); ++i) {
    if (i > 0) CHECK(top[i - 1].probability >= top[i].probability);
    total += top[i].probability;
  }
  CHECK(total <= 1.0 + 1e-9);
}

TEST_CASE("checkpoints round trip bit for bit") {
  const auto model = init_encoder<float>(tiny_config(), 8);
  Checkpoint ckpt;
  add_encoder(ckpt, model);
  ckpt.meta["note"] = "x";
  const std::string bytes = serialize_checkpoint(ckpt);
  const Checkpoint back = deserialize_checkpoint(bytes);
  CHECK(serialize_checkpoint(back) == bytes);
  const auto restored = encoder_from_checkpoint(back);
  std::size_t checked = 0;
  restored.params.for_each([&](const std::string& name, const Tensor<float>& t) {
    const auto original = ckpt.matrix("encoder." + name);
    CHECK(std::memcmp(t.data(), original.data(), sizeof(float) * t.size()) == 0);
    ++checked;
  });
  CHECK(checked == ckpt.tensors.size());
  testing::TempDir dir;
  save_checkpoint(ckpt, dir.file("m.ckpt"));
  CHECK(read_file(dir.file("m.ckpt")) == bytes);
  std::string broken = bytes;
  broken[0] = 'X';
  CHECK_THROWS_AS(deserialize_checkpoint(broken), Error);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)), Error);
}

TEST_CASE("config validation rejects impossible shapes") {
  EncoderConfig c = tiny_config();
  c.num_heads = 3;
  CHECK_THROWS_AS(c.validate(), Error);
  c = tiny_config();
  c.vocab_size = 2;
  CHECK_THROWS_AS(c.validate(), Error);
  TrainSpec s;
  s.learning_rate = -1;
  CHECK_THROWS_AS(s.validate(), Error);
}
