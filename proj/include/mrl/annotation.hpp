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

#ifndef MRL_ANNOTATION_HPP_
#define MRL_ANNOTATION_HPP_

#include <array>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "mrl/sentiment.hpp"

namespace mrl {

// Polarity ratings run -2..2; emotion ratings 0..2.
struct RatingRecord {
  std::string comment_id;
  std::string rater_id;
  Sentiment sentiment = Sentiment::kPolarity;
  int raw_rating = 0;

  void validate() const;
};

// Polarity: negative / neutral / positive. Emotions: not_expressed / expressed.
std::string coarsen(const RatingRecord& record);
std::string coarsen(Sentiment sentiment, int raw_rating);

// CSV "comment_id,rater_id,sentiment,raw_rating"; the header row is optional.
std::vector<RatingRecord> parse_ratings_csv(std::string_view contents);
std::vector<RatingRecord> load_ratings(const std::string& path);
std::string ratings_to_csv(std::span<const RatingRecord> records);

// Nominal disagreement of one item: share of ordered rating pairs that differ.
double observed_disagreement(std::span<const std::string> item);
// Expected disagreement from the pooled coincidence margins of all items with
// at least two ratings. Throws no_pairs when there is none.
double expected_disagreement(std::span<const std::vector<std::string>> items);

// Nominal alpha = 1 - D_o / D_e over a set of items. Returns 1 when D_e = 0.
double krippendorff_alpha(std::span<const std::vector<std::string>> items);

struct ReliabilityItem {
  std::string comment_id;
  Sentiment sentiment = Sentiment::kPolarity;
  std::map<std::string, int> distribution;
  std::size_t raters = 0;
  std::optional<double> alpha;  // absent with fewer than two ratings
  bool kept = false;
  std::optional<std::string> consensus;
  std::string reason;  // why an item was dropped
};

struct ReliabilityReport {
  std::vector<ReliabilityItem> items;  // ordered by (comment_id, sentiment)
  std::map<Sentiment, double> expected;
  double threshold = 0.75;
  std::size_t min_raters = 3;

  std::size_t kept_count() const;
};

struct LabeledItem {
  std::string comment_id;
  Sentiment sentiment = Sentiment::kPolarity;
  std::string label;
  int iteration = 0;
};

// Per item alpha = 1 - D_o(item) / D_e(pooled over its sentiment). Items are
// kept with alpha >= threshold, at least min_raters distinct raters and a
// strict majority label. A rater rating the same item twice is a parse error.
ReliabilityReport filter_reliable(std::span<const RatingRecord> records, double threshold = 0.75,
                                  std::size_t min_raters = 3);
std::vector<LabeledItem> consensus_labels(const ReliabilityReport& report, int iteration = 0);
nlohmann::json reliability_to_json(const ReliabilityReport& report);

// CSV "comment_id,sentiment,label,iteration".
std::string labeled_pool_to_csv(std::span<const LabeledItem> pool);
std::vector<LabeledItem> parse_labeled_pool_csv(std::string_view contents);

// Per document, one score per lexicon category: emotions, positive, negative.
using ScoreTable = std::map<std::string, std::array<double, kNumCategories>>;

// CSV "document_id,<category>..." with one column per lexicon category.
// Parsing looks columns up by header name and ignores extra columns.
std::string score_table_to_csv(const ScoreTable& scores);
ScoreTable parse_score_table_csv(std::string_view contents);

struct SelectionResult {
  std::vector<std::string> ids;  // deduplicated, sorted
  std::size_t pre_dedup_count = 0;
  std::map<Sentiment, std::vector<std::string>> high;  // polarity: top positive
  std::map<Sentiment, std::vector<std::string>> low;   // polarity: top negative
  std::vector<std::string> warnings;
};

// Polarity: top-k by positive and top-k by negative score. Each emotion: top-k
// and bottom-k by its score. Ties go to the smaller document id. Documents in
// `excluded` are never picked.
SelectionResult select_for_annotation(const ScoreTable& scores, std::size_t k = 75,
                                      const std::set<std::string>& excluded = {});
nlohmann::json selection_to_json(const SelectionResult& selection);

struct CorrelationMatrix {
  Eigen::Matrix<double, kNumSentiments, kNumSentiments> r;
  Eigen::Matrix<bool, kNumSentiments, kNumSentiments> defined;
  Eigen::Matrix<long, kNumSentiments, kNumSentiments> n;  // co-labeled items
};

// Pearson correlation of coarse labels across comments labeled for both
// sentiments; polarity maps to -1/0/1, emotions to 0/1. Entries with fewer
// than two co-labeled comments or zero variance are undefined and read 0.
CorrelationMatrix emotion_correlation(std::span<const LabeledItem> pool);
std::string correlation_to_csv(const CorrelationMatrix& m);
nlohmann::json correlation_to_json(const CorrelationMatrix& m);

}  // namespace mrl

#endif  // MRL_ANNOTATION_HPP_
