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

#include "mrl/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include <fmt/format.h>

#include "mrl/common.hpp"

namespace mrl {

namespace {

void expand(nlohmann::json& j, const std::string& manifest_dir) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    const std::string key = "{manifest_dir}";
    for (std::size_t pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + manifest_dir.size())) {
      s.replace(pos, key.size(), manifest_dir);
    }
    j = s;
  } else if (j.is_structured()) {
    for (auto& v : j) expand(v, manifest_dir);
  }
}

}  // namespace

const std::vector<std::string>& stage_types() {
  static const std::vector<std::string> kTypes = {"synth",   "ingest",   "tokenizer", "mlm",       "eval-lm",
                                                  "finetune", "evaluate", "lexicon",   "select",    "alpha",
                                                  "loop",    "correlation", "compare", "bootstrap", "report"};
  return kTypes;
}

std::vector<std::string> stage_input_keys(std::string_view type) {
  if (type == "ingest") return {"input"};
  if (type == "tokenizer") return {"corpus", "rules"};
  if (type == "mlm") return {"corpus", "vocab"};
  if (type == "eval-lm") return {"checkpoint", "vocab", "corpus"};
  if (type == "finetune") return {"checkpoint", "vocab", "data", "corpus"};
  if (type == "evaluate") return {"model", "vocab", "data", "corpus"};
  if (type == "lexicon") return {"corpus", "lexicon", "rules"};
  if (type == "select") return {"scores", "exclude"};
  if (type == "alpha") return {"ratings"};
  if (type == "loop") return {"corpus", "lexicon", "rules", "vocab", "checkpoint", "ratings"};
  if (type == "correlation") return {"pool"};
  if (type == "compare") return {"pretrain", "test", "rules", "pos_train", "pos_test", "ner_train", "ner_test", "polarity"};
  if (type == "bootstrap") return {"corpus", "vocab", "checkpoint"};
  if (type == "report") return {};
  return {};
}

std::vector<std::string> stage_output_keys(std::string_view type) {
  if (type == "report") return {};
  return {"output"};
}

std::uint64_t ExperimentManifest::seed_for(const std::string& stage_id) const {
  if (const auto it = seeds.find(stage_id); it != seeds.end()) return it->second;
  if (const auto it = seeds.find("default"); it != seeds.end()) return it->second;
  return 0;
}

ExperimentManifest parse_manifest(std::string_view text, const std::string& manifest_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, fmt::format("manifest is not valid JSON: {}", e.what()));
  }
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "manifest must be a JSON object");
  ExperimentManifest m;
  // The digest covers the manifest as written, before placeholder expansion,
  // so moving the manifest directory does not change it.
  m.digest = sha256_hex(j.dump());
  expand(j, manifest_dir);
  m.document = j;
  m.name = j.value("name", "");
  if (m.name.empty()) throw Error(ErrorCode::kParseError, "manifest needs a name");
  m.output_dir = j.value("output_dir", m.name);
  if (j.contains("seeds")) {
    if (!j["seeds"].is_object()) throw Error(ErrorCode::kParseError, "seeds must be an object");
    for (const auto& [k, v] : j["seeds"].items()) {
      if (!v.is_number_unsigned()) throw Error(ErrorCode::kParseError, fmt::format("seed '{}' must be a non-negative integer", k));
      m.seeds[k] = v.get<std::uint64_t>();
    }
  }
  if (!j.contains("stages") || !j["stages"].is_array()) throw Error(ErrorCode::kParseError, "manifest needs a stages array");
  for (const auto& s : j["stages"]) {
    if (!s.is_object() || !s.contains("stage")) throw Error(ErrorCode::kParseError, "every stage needs a 'stage' field");
    StageSpec spec;
    spec.type = s["stage"].get<std::string>();
    spec.id = s.value("id", spec.type);
    spec.params = s;
    spec.params.erase("stage");
    spec.params.erase("id");
    m.stages.push_back(std::move(spec));
  }
  validate_manifest(m);
  return m;
}

ExperimentManifest load_manifest(const std::string& path) {
  const std::string dir = std::filesystem::absolute(path).parent_path().string();
  return parse_manifest(read_file(path), dir);
}

void validate_manifest(const ExperimentManifest& manifest) {
  std::set<std::string> ids;
  const auto& types = stage_types();
  for (const auto& s : manifest.stages) {
    if (std::find(types.begin(), types.end(), s.type) == types.end()) {
      throw Error(ErrorCode::kParseError, fmt::format("unknown stage type '{}'", s.type));
    }
    if (!ids.insert(s.id).second) throw Error(ErrorCode::kParseError, fmt::format("duplicate stage id '{}'", s.id));
  }
  for (std::size_t i = 0; i < manifest.stages.size(); ++i) {
    const auto& reader = manifest.stages[i];
    std::vector<std::string> reads;
    for (const auto& key : stage_input_keys(reader.type)) {
      if (!reader.params.contains(key)) continue;
      const auto& v = reader.params[key];
      if (v.is_string()) reads.push_back(v.get<std::string>());
      if (v.is_array()) {
        for (const auto& e : v) {
          if (e.is_string()) reads.push_back(e.get<std::string>());
        }
      }
    }
    for (const auto& path : reads) {
      for (std::size_t later = i + 1; later < manifest.stages.size(); ++later) {
        const auto& writer = manifest.stages[later];
        for (const auto& out : stage_output_keys(writer.type)) {
          if (writer.params.contains(out) && writer.params[out].is_string()) {
            const std::string written = writer.params[out].get<std::string>();
            if (path == written || path.starts_with(written + "/")) {
              throw Error(ErrorCode::kParseError, fmt::format("stage '{}' reads {} before stage '{}' writes it",
                                                              reader.id, path, writer.id));
            }
          }
        }
      }
    }
  }
}

nlohmann::json artifact_stamp(const std::string& manifest_digest, std::uint64_t seed) {
  return {{"manifest_digest", manifest_digest}, {"seed", seed}, {"format_version", kFormatVersion}};
}

}  // namespace mrl
