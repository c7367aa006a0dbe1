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

#ifndef MRL_MANIFEST_HPP_
#define MRL_MANIFEST_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace mrl {

struct StageSpec {
  std::string id;    // unique within the manifest; defaults to the type
  std::string type;  // synth, ingest, tokenizer, mlm, eval-lm, finetune, evaluate,
                     // lexicon, select, alpha, loop, correlation, compare,
                     // bootstrap, report
  nlohmann::json params = nlohmann::json::object();
};

// One JSON document:
//   {"name": ..., "output_dir": ..., "seeds": {"<stage id>": n, "default": n},
//    "stages": [{"stage": "<type>", "id": ..., <params>}, ...]}
// Relative paths inside stage params resolve against output_dir. The string
// "{manifest_dir}" expands to the directory holding the manifest file.
struct ExperimentManifest {
  std::string name;
  std::string output_dir;
  std::map<std::string, std::uint64_t> seeds;
  std::vector<StageSpec> stages;
  nlohmann::json document;  // as parsed, placeholders expanded
  std::string digest;       // sha256 of the canonical JSON dump

  std::uint64_t seed_for(const std::string& stage_id) const;
};

const std::vector<std::string>& stage_types();

// Parameters naming files a stage reads and writes.
std::vector<std::string> stage_input_keys(std::string_view type);
std::vector<std::string> stage_output_keys(std::string_view type);

ExperimentManifest parse_manifest(std::string_view text, const std::string& manifest_dir = ".");
ExperimentManifest load_manifest(const std::string& path);

// Rejects unknown stage types, duplicate ids, and stages reading a path that a
// later stage writes.
void validate_manifest(const ExperimentManifest& manifest);

// {"manifest_digest", "seed", "format_version"} embedded in every artifact.
nlohmann::json artifact_stamp(const std::string& manifest_digest, std::uint64_t seed);

}  // namespace mrl

#endif  // MRL_MANIFEST_HPP_
