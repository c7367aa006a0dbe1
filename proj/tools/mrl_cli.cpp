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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "mrl/common.hpp"
#include "mrl/manifest.hpp"
#include "mrl/pipeline.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

enum class Kind { kString, kInt, kFloat, kBool };

struct Flag {
  Flag(std::string n, std::string k, Kind kd = Kind::kString, std::string h = {})
      : name(std::move(n)), key(std::move(k)), kind(kd), help(std::move(h)) {}

  std::string name;  // --name on the command line
  std::string key;   // stage parameter; dots address nested objects
  Kind kind;
  std::string help;
};

struct Command {
  std::string name;
  std::string stage;
  std::string help;
  std::vector<Flag> flags;
};

// Shared by every stage command.
struct CommonArgs {
  std::string manifest;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
};

void assign(json& params, const std::string& dotted, json value) {
  json* node = &params;
  std::size_t start = 0;
  for (std::size_t dot = dotted.find('.'); dot != std::string::npos; dot = dotted.find('.', start)) {
    node = &(*node)[dotted.substr(start, dot - start)];
    if (!node->is_object()) *node = json::object();
    start = dot + 1;
  }
  (*node)[dotted.substr(start)] = std::move(value);
}

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return text;
  }
}

json typed(const std::string& text, Kind kind) {
  switch (kind) {
    case Kind::kInt:
      return std::stoll(text);
    case Kind::kFloat:
      return std::stod(text);
    case Kind::kBool:
      return text == "1" || text == "true" || text == "yes";
    case Kind::kString:
      break;
  }
  return text;
}

const std::vector<Command>& commands() {
  static const std::vector<Command> all = {
      {"synth", "synth", "Generate the synthetic corpora", {{"output", "output"}}},
      {"ingest",
       "ingest",
       "Clean and split a JSONL corpus",
       {{"input", "input"},
        {"output", "output"},
        {"min-words", "min_words", Kind::kInt},
        {"script", "script", Kind::kString, "hebrew, latin or a list of code point ranges"},
        {"split", "split", Kind::kBool}}},
      {"train-tokenizer",
       "tokenizer",
       "Train a vocabulary",
       {{"corpus", "corpus"},
        {"scheme", "scheme", Kind::kString, "char, subword, morpheme or word"},
        {"size", "size", Kind::kInt},
        {"rules", "rules"},
        {"trim-quantile", "trim_quantile", Kind::kFloat},
        {"positional", "positional", Kind::kBool},
        {"output", "output"}}},
      {"train-mlm",
       "mlm",
       "Pre-train a masked-LM encoder",
       {{"corpus", "corpus"},
        {"vocab", "vocab"},
        {"output", "output"},
        {"epochs", "train.epochs", Kind::kInt},
        {"max-steps", "train.max_steps", Kind::kInt},
        {"lr", "train.learning_rate", Kind::kFloat},
        {"batch-size", "train.batch_size", Kind::kInt}}},
      {"eval-lm",
       "eval-lm",
       "Pseudo-perplexity and OOV rate of an encoder",
       {{"checkpoint", "checkpoint"}, {"vocab", "vocab"}, {"corpus", "corpus"}, {"split", "split"}, {"output", "output"}}},
      {"finetune",
       "finetune",
       "Fine-tune a task head",
       {{"task", "task", Kind::kString, "ner, pos, polarity, emotions or emotion:<name>"},
        {"checkpoint", "checkpoint"},
        {"vocab", "vocab"},
        {"data", "data"},
        {"corpus", "corpus"},
        {"output", "output"},
        {"epochs", "train.epochs", Kind::kInt},
        {"lr", "train.learning_rate", Kind::kFloat},
        {"batch-size", "train.batch_size", Kind::kInt},
        {"pooling", "pooling"},
        {"freeze-encoder", "freeze_encoder", Kind::kBool}}},
      {"evaluate",
       "evaluate",
       "Score a fine-tuned model",
       {{"model", "model"}, {"vocab", "vocab"}, {"data", "data"}, {"corpus", "corpus"}, {"split", "split"}, {"output", "output"}}},
      {"lexicon-score",
       "lexicon",
       "Score documents against a sentiment lexicon",
       {{"corpus", "corpus"}, {"lexicon", "lexicon"}, {"rules", "rules"}, {"split", "split"}, {"output", "output"}}},
      {"select",
       "select",
       "Pick comments for annotation from a score table",
       {{"scores", "scores"}, {"exclude", "exclude"}, {"k", "k", Kind::kInt}, {"output", "output"}}},
      {"alpha",
       "alpha",
       "Inter-rater reliability and consensus labels",
       {{"ratings", "ratings"},
        {"threshold", "threshold", Kind::kFloat},
        {"min-raters", "min_raters", Kind::kInt},
        {"output", "output"},
        {"pool", "pool"}}},
      {"correlation", "correlation", "Pairwise correlation of a labeled pool", {{"pool", "pool"}, {"output", "output"}}},
      {"bootstrap",
       "bootstrap",
       "Bootstrap a fine-tune and evaluate pipeline",
       {{"corpus", "corpus"},
        {"vocab", "vocab"},
        {"checkpoint", "checkpoint"},
        {"sentiment", "sentiment"},
        {"n-samples", "n_samples", Kind::kInt},
        {"output", "output"}}},
      {"report", "report", "Summarize the artifacts under a directory", {{"dir", "dir"}, {"output", "output"}}},
  };
  return all;
}

const Command loop_run{"run",
                       "loop",
                       "Start an annotation loop",
                       {{"corpus", "corpus"},
                        {"lexicon", "lexicon"},
                        {"rules", "rules"},
                        {"vocab", "vocab"},
                        {"checkpoint", "checkpoint"},
                        {"k", "k", Kind::kInt},
                        {"threshold", "threshold", Kind::kFloat},
                        {"max-iterations", "max_iterations", Kind::kInt},
                        {"epsilon", "convergence_epsilon", Kind::kFloat},
                        {"flip-rate", "oracle.flip_rate", Kind::kFloat},
                        {"output", "output"}}};

struct Bound {
  const Command* command;
  CLI::App* app;
  std::vector<std::pair<const Flag*, std::optional<std::string>>> values;
  std::optional<std::string> ratings;  // loop only: recorded oracle
};

void add_common(CLI::App* app, CommonArgs& common) {
  app->add_option("--manifest", common.manifest, "Take defaults from the first matching stage of this manifest");
  app->add_option("--out-dir", common.out_dir, "Directory relative paths resolve against");
  app->add_option("--seed", common.seed, "Stage seed");
  app->add_option("--set", common.sets, "Extra parameter as key=value; dotted keys nest, values parse as JSON");
}

Bound bind(CLI::App& parent, const Command& c, CommonArgs& common) {
  Bound b{&c, parent.add_subcommand(c.name, c.help), {}, std::nullopt};
  b.values.reserve(c.flags.size());
  for (const auto& f : c.flags) {
    b.values.emplace_back(&f, std::nullopt);
    static constexpr const char* kTypeNames[] = {"TEXT", "INT", "FLOAT", "BOOL"};
    b.app->add_option("--" + f.name, b.values.back().second, f.help.empty() ? "stage parameter " + f.key : f.help)
        ->type_name(kTypeNames[static_cast<int>(f.kind)]);
  }
  add_common(b.app, common);
  return b;
}

int run_stage(const Bound& b, const CommonArgs& common) {
  json params = json::object();
  mrl::StageContext ctx;
  ctx.output_dir = mrl::default_output_root();
  if (!common.manifest.empty()) {
    const auto manifest = mrl::load_manifest(common.manifest);
    for (const auto& s : manifest.stages) {
      if (s.type != b.command->stage) continue;
      params = s.params;
      ctx.seed = manifest.seed_for(s.id);
      break;
    }
    ctx.manifest_digest = manifest.digest;
    fs::path out(manifest.output_dir);
    ctx.output_dir = (out.is_relative() ? fs::path(ctx.output_dir) / out : out).lexically_normal().string();
  }
  if (!common.out_dir.empty()) ctx.output_dir = common.out_dir;
  if (common.seed) ctx.seed = *common.seed;
  for (const auto& [flag, value] : b.values) {
    if (value) assign(params, flag->key, typed(*value, flag->kind));
  }
  if (b.ratings) params["oracle"] = {{"kind", "recorded"}, {"ratings", *b.ratings}};
  for (const auto& s : common.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw mrl::Error(mrl::ErrorCode::kInvalidArgument, fmt::format("--set expects key=value, got '{}'", s));
    assign(params, s.substr(0, eq), parse_value(s.substr(eq + 1)));
  }
  fs::create_directories(ctx.output_dir);
  const json summary = mrl::execute_stage(b.command->stage, params, ctx);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_manifest_file(const std::string& path, const std::string& root, const std::string& only_type) {
  const auto manifest = mrl::load_manifest(path);
  mrl::validate_manifest(manifest);
  const auto result = mrl::run_manifest(manifest, root, only_type);
  for (const auto& s : result.stages) {
    std::cout << fmt::format("{:<16} {:<12} {}", s.id, s.type, s.status);
    if (!s.error.empty()) std::cout << ": " << s.error;
    std::cout << "\n";
  }
  std::cout << "output: " << result.output_dir << "\n";
  return result.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tokenization, encoder and sentiment annotation workbench"};
  app.require_subcommand(1);
  CommonArgs common;
  std::vector<Bound> bound;
  bound.reserve(commands().size() + 1);
  for (const auto& c : commands()) bound.push_back(bind(app, c, common));

  auto* loop = app.add_subcommand("loop", "Annotation loop");
  loop->require_subcommand(1);
  bound.push_back(bind(*loop, loop_run, common));
  loop->get_subcommand("run")->add_option("--ratings", bound.back().ratings, "Replay recorded ratings instead of the synthetic oracle");
  std::string resume_dir;
  auto* resume = loop->add_subcommand("resume", "Continue an interrupted loop");
  resume->add_option("state_dir", resume_dir, "Loop output directory")->required();

  std::string manifest_path;
  std::string root = mrl::default_output_root();
  auto* run = app.add_subcommand("run", "Run every stage of a manifest");
  run->add_option("manifest", manifest_path)->required();
  run->add_option("--output-root", root, "Root for a relative output_dir (default $MRL_OUTPUT_ROOT or .)");
  auto* compare = app.add_subcommand("compare", "Run the compare stages of a manifest");
  compare->add_option("manifest", manifest_path)->required();
  compare->add_option("--output-root", root, "Root for a relative output_dir (default $MRL_OUTPUT_ROOT or .)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return run_manifest_file(manifest_path, root, "");
    if (compare->parsed()) return run_manifest_file(manifest_path, root, "compare");
    if (resume->parsed()) {
      std::cout << mrl::resume_loop_stage(resume_dir).dump(2) << "\n";
      return 0;
    }
    for (const auto& b : bound) {
      if (b.app->parsed()) return run_stage(b, common);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
