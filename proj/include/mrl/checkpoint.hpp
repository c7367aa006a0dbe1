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

#ifndef MRL_CHECKPOINT_HPP_
#define MRL_CHECKPOINT_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mrl/encoder.hpp"

namespace mrl {

struct NamedTensor {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<float> data;  // row-major
};

// Binary container: 8-byte magic, little-endian u64 manifest length, a JSON
// manifest (format version, metadata, tensor names, shapes and byte offsets)
// and the tensors as little-endian float32 in manifest order.
struct Checkpoint {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<NamedTensor> tensors;

  const NamedTensor& tensor(std::string_view name) const;
  bool has_tensor(std::string_view name) const;
  void add(std::string name, const Tensor<float>& t);
  Tensor<float> matrix(std::string_view name) const;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

nlohmann::json config_to_json(const EncoderConfig& config);
EncoderConfig config_from_json(const nlohmann::json& j);
nlohmann::json train_spec_to_json(const TrainSpec& spec);
TrainSpec train_spec_from_json(const nlohmann::json& j, TrainSpec defaults = {});

// Encoder tensors are stored under "encoder." names; the config under
// meta["encoder_config"].
void add_encoder(Checkpoint& ckpt, const EncoderModel<float>& model);
EncoderModel<float> encoder_from_checkpoint(const Checkpoint& ckpt);

}  // namespace mrl

#endif  // MRL_CHECKPOINT_HPP_
