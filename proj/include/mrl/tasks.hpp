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

#ifndef MRL_TASKS_HPP_
#define MRL_TASKS_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mrl/checkpoint.hpp"
#include "mrl/corpus.hpp"
#include "mrl/encoder.hpp"
#include "mrl/metrics.hpp"
#include "mrl/sentiment.hpp"
#include "mrl/tokenizers.hpp"

namespace mrl {

struct TaggedSentence {
  std::vector<std::string> words;
  std::vector<std::string> tags;
};

struct TokenTaggingDataset {
  std::vector<TaggedSentence> sentences;
  std::vector<std::string> tag_inventory;

  void validate() const;
  int tag_index(std::string_view tag) const;
};

// CoNLL-style TSV: "token<TAB>tag" per line, blank line between sentences.
// The tag inventory lists tags in order of first appearance.
TokenTaggingDataset parse_conll(std::string_view contents);
TokenTaggingDataset load_conll(const std::string& path);
std::string conll_to_text(const TokenTaggingDataset& data);

struct DocLabel {
  std::string doc_id;
  std::string label;
};

struct DocLabelDataset {
  Sentiment sentiment = Sentiment::kPolarity;
  std::vector<DocLabel> labels;

  const std::vector<std::string>& label_space() const { return mrl::label_space(sentiment); }
  // Labels must lie in the label space and ids must resolve in `corpus`.
  void validate(const Corpus& corpus) const;
};

// CSV "document_id,sentiment_name,label" (header optional), grouped by sentiment.
std::map<Sentiment, DocLabelDataset> parse_doc_labels_csv(std::string_view contents);
std::map<Sentiment, DocLabelDataset> load_doc_labels(const std::string& path);
std::string doc_labels_to_csv(const std::map<Sentiment, DocLabelDataset>& datasets);

enum class Pooling { kFirstToken, kMean };

struct FineTuneOptions {
  bool freeze_encoder = false;
  Pooling pooling = Pooling::kFirstToken;
  std::uint64_t head_seed = 0;
};

// [CLS] ids [SEP], truncated to fit max_seq_len.
std::vector<int> frame_sequence(std::span<const int> ids, int max_seq_len);

struct LinearHead {
  Tensor<float> weight;  // dim x classes
  Tensor<float> bias;    // 1 x classes
};

struct TokenTagger {
  EncoderModel<float> encoder;
  LinearHead head;
  std::vector<std::string> tags;
};

// Trains a per-token softmax head (and, unless frozen, the encoder). A word's
// tag is read at its first sub-word piece.
TokenTagger fine_tune_token_tagger(EncoderModel<float> encoder, const Vocabulary& vocab,
                                   const TokenTaggingDataset& data, const TrainSpec& spec,
                                   const FineTuneOptions& options = {});

std::vector<std::string> predict_tags(const TokenTagger& tagger, const Vocabulary& vocab,
                                      std::span<const std::string> words);

// Tag-level metrics over every word of every sentence.
MetricsReport evaluate_tagger(const TokenTagger& tagger, const Vocabulary& vocab, const TokenTaggingDataset& data);

struct DocClassifier {
  EncoderModel<float> encoder;
  LinearHead head;
  std::vector<std::string> labels;
  Pooling pooling = Pooling::kFirstToken;
  std::string name;
  std::vector<std::string> warnings;
};

struct LabeledText {
  std::string text;
  int label = 0;
};

// Pooled sequence state -> linear head -> softmax. Classes missing from the
// training data produce a warning; their recall is undefined.
DocClassifier fine_tune_doc_classifier(EncoderModel<float> encoder, const Vocabulary& vocab,
                                       std::span<const LabeledText> examples, std::vector<std::string> labels,
                                       const TrainSpec& spec, const FineTuneOptions& options = {});

// Collects labeled texts for one split of the corpus (all splits when
// `split` is empty).
std::vector<LabeledText> labeled_texts(const DocLabelDataset& data, const Corpus& corpus,
                                       std::optional<Split> split = std::nullopt);

DocClassifier fine_tune_doc_classifier(EncoderModel<float> encoder, const Vocabulary& vocab,
                                       const DocLabelDataset& data, const Corpus& corpus, const TrainSpec& spec,
                                       const FineTuneOptions& options = {});

std::vector<double> predict_proba(const DocClassifier& classifier, const Vocabulary& vocab, std::string_view text);
int predict_label(const DocClassifier& classifier, const Vocabulary& vocab, std::string_view text);
MetricsReport evaluate_classifier(const DocClassifier& classifier, const Vocabulary& vocab,
                                  std::span<const LabeledText> examples);

// One independent binary classifier per emotion, each on its own copy of the
// encoder and its own labeled subset.
std::map<Sentiment, DocClassifier> fine_tune_emotion_heads(const EncoderModel<float>& encoder, const Vocabulary& vocab,
                                                           const std::map<Sentiment, DocLabelDataset>& data,
                                                           const Corpus& corpus, const TrainSpec& spec,
                                                           const FineTuneOptions& options = {});

Checkpoint tagger_to_checkpoint(const TokenTagger& tagger);
TokenTagger tagger_from_checkpoint(const Checkpoint& ckpt);
Checkpoint classifier_to_checkpoint(const DocClassifier& classifier);
DocClassifier classifier_from_checkpoint(const Checkpoint& ckpt);

// Receives a corpus with a fresh 70/15/15 partition and the partition seed.
using EvaluationPipeline = std::function<MetricsReport(const Corpus& partitioned, std::uint64_t seed)>;

struct BootstrapResult {
  std::vector<MetricsReport> samples;
  std::map<std::string, SummaryStats> summary;  // "accuracy", "weighted_f1", "f1/<label>", ...
};

BootstrapResult bootstrap_evaluate(const EvaluationPipeline& pipeline, const Corpus& corpus, int n_samples = 50,
                                   std::uint64_t seed = 0);
nlohmann::json bootstrap_to_json(const BootstrapResult& result);

}  // namespace mrl

#endif  // MRL_TASKS_HPP_
