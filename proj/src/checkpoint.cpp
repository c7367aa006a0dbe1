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

#include "mrl/checkpoint.hpp"

#include <algorithm>
#include <cstring>

#include <fmt/core.h>

#include "mrl/common.hpp"

namespace mrl {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'M', 'R', 'L', 'C', 'K', 'P', 'T', '\0'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(std::string_view bytes, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
  return v;
}

void put_f32(std::string& out, float f) {
  std::uint32_t bits = 0;
  std::memcpy(&bits, &f, sizeof bits);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

float get_f32(std::string_view bytes, std::size_t at) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
  float f = 0;
  std::memcpy(&f, &bits, sizeof f);
  return f;
}

}  // namespace

const NamedTensor& Checkpoint::tensor(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  throw Error(ErrorCode::kParseError, fmt::format("checkpoint has no tensor '{}'", name));
}

bool Checkpoint::has_tensor(std::string_view name) const {
  return std::any_of(tensors.begin(), tensors.end(), [&](const NamedTensor& t) { return t.name == name; });
}

void Checkpoint::add(std::string name, const Tensor<float>& t) {
  NamedTensor nt{std::move(name), t.rows(), t.cols(), std::vector<float>(t.data(), t.data() + t.size())};
  tensors.push_back(std::move(nt));
}

Tensor<float> Checkpoint::matrix(std::string_view name) const {
  const auto& t = tensor(name);
  Tensor<float> m(t.rows, t.cols);
  std::copy(t.data.begin(), t.data.end(), m.data());
  return m;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["meta"] = ckpt.meta;
  manifest["tensors"] = json::array();
  std::uint64_t offset = 0;
  for (const auto& t : ckpt.tensors) {
    if (static_cast<Eigen::Index>(t.data.size()) != t.rows * t.cols) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("tensor '{}' has inconsistent shape", t.name));
    }
    manifest["tensors"].push_back({{"name", t.name}, {"shape", {t.rows, t.cols}}, {"offset", offset}, {"dtype", "float32_le"}});
    offset += t.data.size() * 4;
  }
  const std::string header = manifest.dump();
  std::string out(kMagic, sizeof kMagic);
  put_u64(out, header.size());
  out += header;
  out.reserve(out.size() + offset);
  for (const auto& t : ckpt.tensors) {
    for (float f : t.data) put_f32(out, f);
  }
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorCode::kParseError, "not a checkpoint file");
  }
  const std::uint64_t header_len = get_u64(bytes, 8);
  if (16 + header_len > bytes.size()) throw Error(ErrorCode::kParseError, "truncated checkpoint manifest");
  json manifest;
  try {
    manifest = json::parse(bytes.substr(16, header_len));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("checkpoint manifest: ") + e.what());
  }
  if (manifest.value("format_version", 0) != kFormatVersion) {
    throw Error(ErrorCode::kParseError, "unsupported checkpoint format version");
  }
  const std::size_t data_start = 16 + header_len;
  Checkpoint ckpt;
  ckpt.meta = manifest["meta"];
  for (const auto& entry : manifest["tensors"]) {
    NamedTensor t;
    t.name = entry["name"].get<std::string>();
    t.rows = entry["shape"][0].get<Eigen::Index>();
    t.cols = entry["shape"][1].get<Eigen::Index>();
    const auto offset = entry["offset"].get<std::uint64_t>();
    const auto count = static_cast<std::size_t>(t.rows * t.cols);
    if (data_start + offset + count * 4 > bytes.size()) {
      throw Error(ErrorCode::kParseError, fmt::format("tensor '{}' runs past end of file", t.name));
    }
    t.data.resize(count);
    for (std::size_t i = 0; i < count; ++i) t.data[i] = get_f32(bytes, data_start + offset + 4 * i);
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) { write_file(path, serialize_checkpoint(ckpt)); }

Checkpoint load_checkpoint(const std::string& path) { return deserialize_checkpoint(read_file(path)); }

json config_to_json(const EncoderConfig& c) {
  return {{"num_layers", c.num_layers}, {"num_heads", c.num_heads},     {"model_dim", c.model_dim},
          {"ffn_dim", c.ffn_dim},       {"max_seq_len", c.max_seq_len}, {"vocab_size", c.vocab_size},
          {"dropout", c.dropout},       {"tie_embeddings", c.tie_embeddings}};
}

EncoderConfig config_from_json(const json& j) {
  EncoderConfig c;
  c.num_layers = j.value("num_layers", c.num_layers);
  c.num_heads = j.value("num_heads", c.num_heads);
  c.model_dim = j.value("model_dim", c.model_dim);
  c.ffn_dim = j.value("ffn_dim", c.ffn_dim);
  c.max_seq_len = j.value("max_seq_len", c.max_seq_len);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.dropout = j.value("dropout", c.dropout);
  c.tie_embeddings = j.value("tie_embeddings", c.tie_embeddings);
  return c;
}

json train_spec_to_json(const TrainSpec& s) {
  return {{"epochs", s.epochs},   {"learning_rate", s.learning_rate}, {"batch_size", s.batch_size},
          {"beta1", s.beta1},     {"beta2", s.beta2},                 {"epsilon", s.epsilon},
          {"mask_fraction", s.mask_fraction}, {"seed", s.seed},       {"max_steps", s.max_steps}};
}

TrainSpec train_spec_from_json(const json& j, TrainSpec s) {
  s.epochs = j.value("epochs", s.epochs);
  s.learning_rate = j.value("learning_rate", s.learning_rate);
  s.batch_size = j.value("batch_size", s.batch_size);
  s.beta1 = j.value("beta1", s.beta1);
  s.beta2 = j.value("beta2", s.beta2);
  s.epsilon = j.value("epsilon", s.epsilon);
  s.mask_fraction = j.value("mask_fraction", s.mask_fraction);
  s.seed = j.value("seed", s.seed);
  s.max_steps = j.value("max_steps", s.max_steps);
  return s;
}

void add_encoder(Checkpoint& ckpt, const EncoderModel<float>& model) {
  ckpt.meta["encoder_config"] = config_to_json(model.config);
  model.params.for_each([&ckpt](const std::string& name, const Tensor<float>& t) { ckpt.add("encoder." + name, t); });
}

EncoderModel<float> encoder_from_checkpoint(const Checkpoint& ckpt) {
  if (!ckpt.meta.contains("encoder_config")) throw Error(ErrorCode::kParseError, "checkpoint lacks an encoder config");
  EncoderModel<float> model = init_encoder<float>(config_from_json(ckpt.meta["encoder_config"]), 0);
  model.params.for_each([&ckpt](const std::string& name, Tensor<float>& t) {
    const auto& stored = ckpt.tensor("encoder." + name);
    if (stored.rows != t.rows() || stored.cols != t.cols()) {
      throw Error(ErrorCode::kParseError, fmt::format("tensor '{}' has the wrong shape", name));
    }
    std::copy(stored.data.begin(), stored.data.end(), t.data());
  });
  return model;
}

}  // namespace mrl
