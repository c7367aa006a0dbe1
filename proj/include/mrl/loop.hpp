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

#ifndef MRL_LOOP_HPP_
#define MRL_LOOP_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mrl/annotation.hpp"
#include "mrl/corpus.hpp"
#include "mrl/encoder.hpp"
#include "mrl/lexicon.hpp"
#include "mrl/tasks.hpp"
#include "mrl/tokenizers.hpp"

namespace mrl {

class RaterOracle {
 public:
  virtual ~RaterOracle() = default;
  // Ratings of every sentiment the raters judged for each requested comment.
  // Throws oracle_failure when it cannot answer.
  virtual std::vector<RatingRecord> annotate(std::span<const std::string> comment_ids) = 0;
};

// Replays ratings from a file.
class RecordedOracle : public RaterOracle {
 public:
  explicit RecordedOracle(std::vector<RatingRecord> records);
  std::vector<RatingRecord> annotate(std::span<const std::string> comment_ids) override;

 private:
  std::map<std::string, std::vector<RatingRecord>> by_comment_;
};

struct SyntheticOracleOptions {
  double flip_rate = 0.0;
  int raters_per_comment = 3;
  int batch_size = 20;  // comments per rater assignment
  std::uint64_t seed = 0;
  int fail_on_call = -1;  // testing hook: the n-th annotate call (0-based) fails
};

// Rates from the planted labels in Document::labels. Each rating flips to a
// different coarse label with probability flip_rate, then maps to a raw score
// on the sentiment's scale. Ratings depend only on (seed, comment, sentiment,
// rater slot).
class SyntheticOracle : public RaterOracle {
 public:
  SyntheticOracle(const Corpus& corpus, SyntheticOracleOptions options);
  std::vector<RatingRecord> annotate(std::span<const std::string> comment_ids) override;

 private:
  std::map<std::string, std::map<std::string, std::string>> truth_;
  SyntheticOracleOptions options_;
  int calls_ = 0;
};

struct LoopConfig {
  std::size_t k = 75;
  double threshold = 0.75;
  std::size_t min_raters = 3;
  int max_iterations = 3;
  double convergence_epsilon = 0.01;
  TrainSpec train;
  FineTuneOptions finetune;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json loop_config_to_json(const LoopConfig& config);
LoopConfig loop_config_from_json(const nlohmann::json& j);

// Everything the loop reads. The corpus must carry a train/validation split:
// selection draws from train documents, validation documents are rated once
// up front and score every iteration.
struct LoopInputs {
  const Corpus& corpus;
  const SentimentLexicon& lexicon;
  const Lemmatizer& lemmatizer;
  const EncoderModel<float>& encoder;
  const Vocabulary& vocab;
  RaterOracle& oracle;
};

struct IterationRecord {
  int iteration = 0;
  std::string score_source;  // "lexicon" or "classifier"
  std::size_t pre_dedup = 0;
  std::size_t selected = 0;
  std::size_t newly_labeled = 0;
  std::size_t pool_size = 0;
  std::map<Sentiment, double> f1;  // validation weighted F1 per sentiment
  double mean_f1 = 0.0;
  std::vector<std::string> warnings;
};

nlohmann::json iteration_to_json(const IterationRecord& r);
IterationRecord iteration_from_json(const nlohmann::json& j);

struct LoopState {
  int iteration = 0;  // completed iterations
  std::string status = "running";  // running, converged, max_iterations, oracle_failure
  std::vector<LabeledItem> pool;
  std::vector<LabeledItem> validation;
  bool validation_rated = false;
  std::set<std::string> annotated;
  std::vector<IterationRecord> history;
  nlohmann::json meta = nlohmann::json::object();

  bool finished() const { return status == "converged" || status == "max_iterations"; }
};

// State directory layout:
//   state.json                   status, config, history, annotated ids, meta
//   validation/                  ratings.csv, reliability.json, pool.csv
//   iter_NNN/                    scores.csv, selection.json, ratings.csv,
//                                reliability.json, labeled_pool.csv,
//                                metrics.json, checkpoints/<sentiment>.ckpt,
//                                manifest.json
// Iteration 0 ranks by lexicon scores, later ones by the previous iteration's
// classifier probabilities. The loop stops when the mean validation weighted
// F1 moves less than convergence_epsilon (the first iteration compares with
// 0) or after max_iterations. An oracle failure saves the state and rethrows
// as oracle_failure; resume_loop picks up from the saved state.
LoopState run_loop(const LoopInputs& inputs, const LoopConfig& config, const std::string& state_dir,
                   const nlohmann::json& meta = nlohmann::json::object());
LoopState resume_loop(const LoopInputs& inputs, const std::string& state_dir);

LoopState load_loop_state(const std::string& state_dir);
LoopConfig load_loop_config(const std::string& state_dir);

}  // namespace mrl

#endif  // MRL_LOOP_HPP_
