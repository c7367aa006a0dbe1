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

#include "mrl/loop.hpp"
#include "mrl/manifest.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <utility>

#include <fmt/format.h>

#include "mrl/checkpoint.hpp"
#include "mrl/common.hpp"
#include "mrl/random.hpp"

namespace mrl {

namespace fs = std::filesystem;

RecordedOracle::RecordedOracle(std::vector<RatingRecord> records) {
  for (auto& r : records) by_comment_[r.comment_id].push_back(std::move(r));
}

std::vector<RatingRecord> RecordedOracle::annotate(std::span<const std::string> comment_ids) {
  std::vector<RatingRecord> out;
  std::vector<std::string> missing;
  for (const auto& id : comment_ids) {
    const auto it = by_comment_.find(id);
    if (it == by_comment_.end()) {
      missing.push_back(id);
      continue;
    }
    out.insert(out.end(), it->second.begin(), it->second.end());
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::kOracleFailure, fmt::format("no recorded ratings for {} comment(s), first '{}'",
                                                       missing.size(), missing.front()));
  }
  return out;
}

SyntheticOracle::SyntheticOracle(const Corpus& corpus, SyntheticOracleOptions options) : options_(options) {
  if (options_.raters_per_comment < 1 || options_.batch_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic oracle needs positive rater and batch counts");
  }
  if (!(options_.flip_rate >= 0.0 && options_.flip_rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "flip_rate must lie in [0, 1]");
  }
  for (const auto& d : corpus.documents) truth_[d.id] = d.labels;
}

std::vector<RatingRecord> SyntheticOracle::annotate(std::span<const std::string> comment_ids) {
  if (calls_++ == options_.fail_on_call) throw Error(ErrorCode::kOracleFailure, "synthetic oracle failure");
  std::vector<RatingRecord> out;
  const auto batch = static_cast<std::size_t>(options_.batch_size);
  for (std::size_t start = 0; start < comment_ids.size(); start += batch) {
    const std::size_t end = std::min(comment_ids.size(), start + batch);
    std::string joined;
    for (std::size_t i = start; i < end; ++i) joined += comment_ids[i] + "\n";
    const std::uint64_t batch_key = stable_hash(joined, options_.seed);
    for (std::size_t i = start; i < end; ++i) {
      const auto& id = comment_ids[i];
      const auto it = truth_.find(id);
      if (it == truth_.end()) throw Error(ErrorCode::kOracleFailure, fmt::format("unknown comment '{}'", id));
      for (const Sentiment s : kAllSentiments) {
        const auto label_it = it->second.find(std::string(to_string(s)));
        if (label_it == it->second.end()) continue;
        const auto& space = label_space(s);
        const int truth = label_index(s, label_it->second);
        for (int j = 0; j < options_.raters_per_comment; ++j) {
          Rng rng(derive_seed(derive_seed(options_.seed, fmt::format("{}/{}", id, to_string(s))),
                              static_cast<std::uint64_t>(j)));
          int label = truth;
          if (rng.bernoulli(options_.flip_rate)) {
            label = static_cast<int>(rng.index(space.size() - 1));
            if (label >= truth) ++label;
          }
          const bool strong = rng.bernoulli(0.5);
          int raw = 0;
          if (is_emotion(s)) {
            raw = label == 0 ? 0 : (strong ? 2 : 1);
          } else {
            raw = label == 1 ? 0 : (label == 0 ? -1 : 1) * (strong ? 2 : 1);
          }
          out.push_back({id, fmt::format("rater-{:016x}-{}", batch_key, j), s, raw});
        }
      }
    }
  }
  return out;
}

void LoopConfig::validate() const {
  train.validate();
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
  if (max_iterations < 1) throw Error(ErrorCode::kInvalidArgument, "max_iterations must be positive");
  if (!(convergence_epsilon >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "convergence_epsilon must be non-negative");
  if (min_raters < 2) throw Error(ErrorCode::kInvalidArgument, "min_raters must be at least 2");
}

nlohmann::json loop_config_to_json(const LoopConfig& c) {
  nlohmann::json j;
  j["k"] = c.k;
  j["threshold"] = c.threshold;
  j["min_raters"] = c.min_raters;
  j["max_iterations"] = c.max_iterations;
  // JSON has no infinity; null stands for it.
  j["convergence_epsilon"] = std::isinf(c.convergence_epsilon) ? nlohmann::json(nullptr) : nlohmann::json(c.convergence_epsilon);
  j["train"] = train_spec_to_json(c.train);
  j["finetune"] = {{"freeze_encoder", c.finetune.freeze_encoder},
                   {"pooling", c.finetune.pooling == Pooling::kMean ? "mean" : "first"},
                   {"head_seed", c.finetune.head_seed}};
  j["seed"] = c.seed;
  return j;
}

LoopConfig loop_config_from_json(const nlohmann::json& j) {
  LoopConfig c;
  c.k = j.value("k", c.k);
  c.threshold = j.value("threshold", c.threshold);
  c.min_raters = j.value("min_raters", c.min_raters);
  c.max_iterations = j.value("max_iterations", c.max_iterations);
  if (j.contains("convergence_epsilon")) {
    c.convergence_epsilon = j["convergence_epsilon"].is_null() ? std::numeric_limits<double>::infinity()
                                                               : j["convergence_epsilon"].get<double>();
  }
  if (j.contains("train")) c.train = train_spec_from_json(j["train"], c.train);
  if (j.contains("finetune")) {
    const auto& f = j["finetune"];
    c.finetune.freeze_encoder = f.value("freeze_encoder", false);
    const std::string pooling = f.value("pooling", "first");
    if (pooling != "first" && pooling != "mean") throw Error(ErrorCode::kParseError, fmt::format("unknown pooling '{}'", pooling));
    c.finetune.pooling = pooling == "mean" ? Pooling::kMean : Pooling::kFirstToken;
    c.finetune.head_seed = f.value("head_seed", std::uint64_t{0});
  }
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

nlohmann::json iteration_to_json(const IterationRecord& r) {
  nlohmann::json j;
  j["iteration"] = r.iteration;
  j["score_source"] = r.score_source;
  j["pre_dedup"] = r.pre_dedup;
  j["selected"] = r.selected;
  j["newly_labeled"] = r.newly_labeled;
  j["pool_size"] = r.pool_size;
  j["f1"] = nlohmann::json::object();
  for (const auto& [s, f] : r.f1) j["f1"][std::string(to_string(s))] = f;
  j["mean_f1"] = r.mean_f1;
  j["warnings"] = r.warnings;
  return j;
}

IterationRecord iteration_from_json(const nlohmann::json& j) {
  IterationRecord r;
  r.iteration = j.at("iteration").get<int>();
  r.score_source = j.value("score_source", "");
  r.pre_dedup = j.value("pre_dedup", std::size_t{0});
  r.selected = j.value("selected", std::size_t{0});
  r.newly_labeled = j.value("newly_labeled", std::size_t{0});
  r.pool_size = j.value("pool_size", std::size_t{0});
  for (const auto& [name, f] : j.at("f1").items()) r.f1[parse_sentiment(name)] = f.get<double>();
  r.mean_f1 = j.at("mean_f1").get<double>();
  r.warnings = j.value("warnings", std::vector<std::string>{});
  return r;
}

namespace {

std::string iter_dir(const std::string& root, int iteration) {
  return (fs::path(root) / fmt::format("iter_{:03d}", iteration)).string();
}

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void write_json(const std::string& path, const nlohmann::json& j) { write_file(path, j.dump(2) + "\n"); }

nlohmann::json loop_stamp(const LoopState& state, const LoopConfig& config) {
  if (state.meta.is_object() && state.meta.contains("stamp")) return state.meta.at("stamp");
  return artifact_stamp("", config.seed);
}

void write_stamped_json(const std::string& path, nlohmann::json j, const nlohmann::json& stamp) {
  j["stamp"] = stamp;
  write_json(path, j);
}

void write_stamped_csv(const std::string& path, const std::string& body, const nlohmann::json& stamp) {
  write_file(path, fmt::format("# manifest_digest={} seed={} format_version={}\n", stamp.at("manifest_digest").get<std::string>(),
                               stamp.at("seed").get<std::uint64_t>(), stamp.at("format_version").get<int>()) +
                       body);
}

void save_state(const std::string& root, const LoopState& state, const LoopConfig& config) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["status"] = state.status;
  j["iteration"] = state.iteration;
  j["config"] = loop_config_to_json(config);
  j["validation_rated"] = state.validation_rated;
  j["validation_size"] = state.validation.size();
  j["pool_size"] = state.pool.size();
  j["annotated"] = std::vector<std::string>(state.annotated.begin(), state.annotated.end());
  j["history"] = nlohmann::json::array();
  for (const auto& r : state.history) j["history"].push_back(iteration_to_json(r));
  j["meta"] = state.meta;
  write_stamped_json(path_in(root, "state.json"), j, loop_stamp(state, config));
}

struct Session {
  const LoopInputs& in;
  const LoopConfig& config;
  std::string root;
  LoopState state;
  std::map<Sentiment, DocClassifier> classifiers;

  std::vector<RatingRecord> ask(std::span<const std::string> ids) {
    try {
      return in.oracle.annotate(ids);
    } catch (const Error& e) {
      state.status = "oracle_failure";
      save_state(root, state, config);
      throw Error(ErrorCode::kOracleFailure,
                  fmt::format("rater oracle failed at iteration {}: {}; state saved in {}", state.iteration, e.what(), root));
    }
  }

  void rate_validation() {
    std::vector<std::string> ids;
    for (const Document* d : in.corpus.in_split(Split::kValidation)) ids.push_back(d->id);
    if (ids.empty()) throw Error(ErrorCode::kInsufficientData, "the loop needs validation documents");
    const auto ratings = ask(ids);
    const auto report = filter_reliable(ratings, config.threshold, config.min_raters);
    state.validation = consensus_labels(report, -1);
    state.validation_rated = true;
    const std::string dir = path_in(root, "validation");
    write_stamped_csv(path_in(dir, "ratings.csv"), ratings_to_csv(ratings), loop_stamp(state, config));
    write_stamped_json(path_in(dir, "reliability.json"), reliability_to_json(report), loop_stamp(state, config));
    write_stamped_csv(path_in(dir, "pool.csv"), labeled_pool_to_csv(state.validation), loop_stamp(state, config));
  }

  ScoreTable score(std::vector<std::string>& warnings) {
    ScoreTable table;
    for (const Document* d : in.corpus.in_split(Split::kTrain)) {
      if (state.annotated.contains(d->id)) continue;
      const SentimentScores lex = score_document(*d, in.lexicon, in.lemmatizer);
      auto& row = table[d->id];
      row = lex.scores;
      if (state.iteration == 0) continue;
      for (const auto& [s, clf] : classifiers) {
        const auto p = predict_proba(clf, in.vocab, d->text);
        if (is_emotion(s)) {
          row[static_cast<std::size_t>(category_of(s))] = p[1];
        } else {
          row[static_cast<std::size_t>(Category::kNegative)] = p[0];
          row[static_cast<std::size_t>(Category::kPositive)] = p[2];
        }
      }
    }
    if (state.iteration > 0) {
      for (const Sentiment s : kAllSentiments) {
        if (!classifiers.contains(s)) {
          warnings.push_back(fmt::format("no {} classifier yet; ranking by lexicon score", to_string(s)));
        }
      }
    }
    return table;
  }

  void run_iteration() {
    const int t = state.iteration;
    const std::string dir = iter_dir(root, t);
    IterationRecord record;
    record.iteration = t;
    record.score_source = t == 0 ? "lexicon" : "classifier";
    const ScoreTable scores = score(record.warnings);
    const SelectionResult selection = select_for_annotation(scores, config.k, state.annotated);
    record.warnings.insert(record.warnings.end(), selection.warnings.begin(), selection.warnings.end());
    record.pre_dedup = selection.pre_dedup_count;
    record.selected = selection.ids.size();
    const auto ratings = ask(selection.ids);

    state.annotated.insert(selection.ids.begin(), selection.ids.end());
    const auto report = filter_reliable(ratings, config.threshold, config.min_raters);
    const auto fresh = consensus_labels(report, t);
    record.newly_labeled = fresh.size();
    state.pool.insert(state.pool.end(), fresh.begin(), fresh.end());
    record.pool_size = state.pool.size();

    classifiers.clear();
    nlohmann::json metrics = nlohmann::json::object();
    double f1_sum = 0.0;
    for (const Sentiment s : kAllSentiments) {
      const std::string name(to_string(s));
      std::vector<LabeledText> train, valid;
      for (const auto& item : state.pool) {
        if (item.sentiment == s) train.push_back({in.corpus.find(item.comment_id)->text, label_index(s, item.label)});
      }
      for (const auto& item : state.validation) {
        if (item.sentiment == s) valid.push_back({in.corpus.find(item.comment_id)->text, label_index(s, item.label)});
      }
      if (train.empty()) {
        record.warnings.push_back(fmt::format("no reliable {} labels yet; no classifier trained", name));
        continue;
      }
      TrainSpec spec = config.train;
      spec.seed = derive_seed(config.seed, fmt::format("iter{}/{}", t, name));
      FineTuneOptions options = config.finetune;
      options.head_seed = derive_seed(config.finetune.head_seed, name);
      DocClassifier clf = fine_tune_doc_classifier(in.encoder, in.vocab, train, label_space(s), spec, options);
      clf.name = name;
      for (const auto& w : clf.warnings) record.warnings.push_back(fmt::format("{}: {}", name, w));
      Checkpoint ckpt = classifier_to_checkpoint(clf);
      ckpt.meta["iteration"] = t;
      ckpt.meta["seed"] = spec.seed;
      ckpt.meta["stamp"] = loop_stamp(state, config);
      save_checkpoint(ckpt, path_in(dir, fmt::format("checkpoints/{}.ckpt", name)));
      if (!valid.empty()) {
        const MetricsReport m = evaluate_classifier(clf, in.vocab, valid);
        metrics[name] = metrics_to_json(m);
        record.f1[s] = m.weighted_f1;
        f1_sum += m.weighted_f1;
      } else {
        record.warnings.push_back(fmt::format("no validation labels for {}", name));
      }
      classifiers.emplace(s, std::move(clf));
    }
    record.mean_f1 = record.f1.empty() ? 0.0 : f1_sum / static_cast<double>(record.f1.size());

    write_stamped_csv(path_in(dir, "scores.csv"), score_table_to_csv(scores), loop_stamp(state, config));
    write_stamped_json(path_in(dir, "selection.json"), selection_to_json(selection), loop_stamp(state, config));
    write_stamped_csv(path_in(dir, "ratings.csv"), ratings_to_csv(ratings), loop_stamp(state, config));
    write_stamped_json(path_in(dir, "reliability.json"), reliability_to_json(report), loop_stamp(state, config));
    write_stamped_csv(path_in(dir, "labeled_pool.csv"), labeled_pool_to_csv(state.pool), loop_stamp(state, config));
    write_stamped_json(path_in(dir, "metrics.json"), metrics, loop_stamp(state, config));
    nlohmann::json manifest = iteration_to_json(record);
    manifest["format_version"] = kFormatVersion;
    manifest["meta"] = state.meta;
    manifest["stamp"] = loop_stamp(state, config);
    nlohmann::json files = nlohmann::json::object();
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (!entry.is_regular_file() || entry.path().filename() == "manifest.json") continue;
      files[fs::relative(entry.path(), dir).generic_string()] = sha256_hex(read_file(entry.path().string()));
    }
    manifest["files"] = files;
    write_json(path_in(dir, "manifest.json"), manifest);

    const double previous = state.history.empty() ? 0.0 : state.history.back().mean_f1;
    state.history.push_back(std::move(record));
    state.iteration = t + 1;
    if (std::abs(state.history.back().mean_f1 - previous) < config.convergence_epsilon) {
      state.status = "converged";
    } else if (state.iteration >= config.max_iterations) {
      state.status = "max_iterations";
    } else {
      state.status = "running";
    }
    save_state(root, state, config);
  }

  void drive() {
    if (!state.validation_rated) rate_validation();
    state.status = "running";
    save_state(root, state, config);
    while (!state.finished()) run_iteration();
  }
};

void check_inputs(const LoopInputs& in) {
  if (in.encoder.config.vocab_size != static_cast<int>(in.vocab.size())) {
    throw Error(ErrorCode::kInvalidArgument, "encoder and vocabulary sizes differ");
  }
  if (in.corpus.in_split(Split::kTrain).empty()) throw Error(ErrorCode::kInsufficientData, "the loop needs train documents");
}

}  // namespace

LoopState run_loop(const LoopInputs& inputs, const LoopConfig& config, const std::string& state_dir,
                   const nlohmann::json& meta) {
  config.validate();
  check_inputs(inputs);
  if (fs::exists(path_in(state_dir, "state.json"))) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("{} already holds a loop; use resume", state_dir));
  }
  Session session{inputs, config, state_dir, {}, {}};
  session.state.meta = meta;
  session.drive();
  return session.state;
}

LoopState load_loop_state(const std::string& state_dir) {
  const auto j = nlohmann::json::parse(read_file(path_in(state_dir, "state.json")));
  LoopState state;
  state.iteration = j.at("iteration").get<int>();
  state.status = j.at("status").get<std::string>();
  state.validation_rated = j.value("validation_rated", false);
  for (const auto& id : j.at("annotated")) state.annotated.insert(id.get<std::string>());
  for (const auto& r : j.at("history")) state.history.push_back(iteration_from_json(r));
  state.meta = j.value("meta", nlohmann::json::object());
  if (state.validation_rated) {
    state.validation = parse_labeled_pool_csv(read_file(path_in(path_in(state_dir, "validation"), "pool.csv")));
  }
  if (state.iteration > 0) {
    state.pool = parse_labeled_pool_csv(read_file(path_in(iter_dir(state_dir, state.iteration - 1), "labeled_pool.csv")));
  }
  return state;
}

LoopConfig load_loop_config(const std::string& state_dir) {
  const auto j = nlohmann::json::parse(read_file(path_in(state_dir, "state.json")));
  return loop_config_from_json(j.at("config"));
}

LoopState resume_loop(const LoopInputs& inputs, const std::string& state_dir) {
  const LoopConfig config = load_loop_config(state_dir);
  check_inputs(inputs);
  Session session{inputs, config, state_dir, load_loop_state(state_dir), {}};
  if (session.state.finished()) return session.state;
  if (session.state.iteration > 0) {
    const std::string ckpt_dir = path_in(iter_dir(state_dir, session.state.iteration - 1), "checkpoints");
    for (const Sentiment s : kAllSentiments) {
      const std::string path = path_in(ckpt_dir, fmt::format("{}.ckpt", to_string(s)));
      if (fs::exists(path)) session.classifiers.emplace(s, classifier_from_checkpoint(load_checkpoint(path)));
    }
  }
  session.drive();
  return session.state;
}

}  // namespace mrl
