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

#ifndef MRL_PIPELINE_HPP_
#define MRL_PIPELINE_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mrl/manifest.hpp"

namespace mrl {

struct StageContext {
  std::string output_dir = ".";  // relative stage paths resolve here
  std::string manifest_digest;    // empty outside a manifest run
  std::uint64_t seed = 0;
};

// Runs one stage; throws on failure. Returns a JSON summary of what it wrote.
nlohmann::json execute_stage(const std::string& type, const nlohmann::json& params, const StageContext& ctx);

struct StageOutcome {
  std::string id;
  std::string type;
  std::string status;  // ok, failed, skipped (after a failure), not_selected
  std::string error;
  nlohmann::json summary;
};

struct RunResult {
  std::string output_dir;
  std::vector<StageOutcome> stages;

  bool ok() const;
};

// Resolves output_dir against `output_root`, writes manifest.json (the parsed
// manifest) and run.json (stage outcomes), and runs the stages in order.
// After a failure the remaining stages are skipped. When `only_type` is set,
// stages of other types are not_selected and do not count against ok().
RunResult run_manifest(const ExperimentManifest& manifest, const std::string& output_root,
                       const std::string& only_type = "");

// Default output root: $MRL_OUTPUT_ROOT, else the working directory.
std::string default_output_root();

struct ComparisonRow {
  std::string arm;
  std::string scheme;
  std::optional<double> pseudo_perplexity;
  std::optional<double> oov_rate;
  std::optional<double> ner_f1;
  std::optional<double> pos_f1;
  std::optional<double> polarity_f1;
  std::map<std::string, std::string> errors;  // column -> message
};

// One row per tokenization arm: vocabulary, toy masked-LM, pseudo-perplexity
// on the test corpus, OOV rate and downstream F1s. A failing step leaves its
// cell marked FAILED and the run continues.
std::vector<ComparisonRow> run_comparison(const nlohmann::json& params, const StageContext& ctx);
std::string comparison_to_csv(const std::vector<ComparisonRow>& rows);

// Continues an interrupted annotation loop from its state directory, using the
// inputs recorded when it started.
nlohmann::json resume_loop_stage(const std::string& state_dir);

// Collects stage outputs under `dir` into a summary without recomputing.
struct Report {
  nlohmann::json summary;
  std::string metrics_csv;
  std::string bootstrap_csv;
  std::string comparison_csv;
};
Report build_report(const std::string& dir);

}  // namespace mrl

#endif  // MRL_PIPELINE_HPP_
