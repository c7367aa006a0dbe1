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

#include "mrl/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

#include <fmt/format.h>

#include "mrl/common.hpp"
#include "mrl/random.hpp"
#include "mrl/utf8.hpp"

namespace mrl {

namespace {

using Mat = Tensor<float>;

LinearHead init_head(int dim, int classes, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "head"));
  LinearHead head;
  head.weight.resize(dim, classes);
  for (Eigen::Index i = 0; i < head.weight.size(); ++i) head.weight.data()[i] = static_cast<float>(0.02 * rng.normal());
  head.bias = Mat::Zero(1, classes);
  return head;
}

// Softmax cross-entropy over logit rows. Writes dLoss/dLogits scaled by
// `scale` into `d_logits` and returns the summed loss.
double softmax_xent(const Mat& logits, std::span<const int> targets, double scale, Mat& d_logits) {
  d_logits = softmax_rows(logits);
  double loss = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const int t = targets[static_cast<std::size_t>(r)];
    loss -= std::log(std::max(static_cast<double>(d_logits(r, t)), 1e-30));
    d_logits(r, t) -= 1.0f;
  }
  d_logits *= static_cast<float>(scale);
  return loss;
}

struct HeadGrads {
  Mat weight, bias;
};

class FineTuner {
 public:
  FineTuner(EncoderModel<float>& encoder, LinearHead& head, const TrainSpec& spec, bool freeze)
      : encoder_(encoder), head_(head), adam_(spec), freeze_(freeze) {
    grads_ = encoder.params.zeros_like();
    head_grads_.weight = Mat::Zero(head.weight.rows(), head.weight.cols());
    head_grads_.bias = Mat::Zero(1, head.bias.cols());
    params_ = {&head_.weight, &head_.bias};
    grad_ptrs_ = {&head_grads_.weight, &head_grads_.bias};
    if (!freeze_) {
      for (auto* t : tensor_list(encoder_.params)) params_.push_back(t);
      for (const auto* t : tensor_list(std::as_const(grads_))) grad_ptrs_.push_back(t);
    }
  }

  void zero() {
    grads_.set_zero();
    head_grads_.weight.setZero();
    head_grads_.bias.setZero();
  }

  // Forward through encoder and head for the selected rows; accumulates
  // gradients of scale * summed cross-entropy.
  double accumulate(std::span<const int> ids, Pooling pooling, std::span<const std::size_t> rows,
                    std::span<const int> targets, double scale, const DropoutContext* dropout) {
    ForwardCache<float> cache;
    const Mat hidden = encode_hidden(encoder_, ids, {}, freeze_ ? nullptr : &cache, dropout);
    Mat features;
    if (rows.empty()) {
      features = pooling == Pooling::kMean ? Mat(hidden.colwise().mean()) : Mat(hidden.row(0));
    } else {
      features.resize(static_cast<Eigen::Index>(rows.size()), hidden.cols());
      for (std::size_t i = 0; i < rows.size(); ++i) features.row(static_cast<Eigen::Index>(i)) = hidden.row(static_cast<Eigen::Index>(rows[i]));
    }
    Mat logits = features * head_.weight;
    logits.rowwise() += head_.bias.row(0);
    Mat d_logits;
    const double loss = softmax_xent(logits, targets, scale, d_logits);
    head_grads_.weight.noalias() += features.transpose() * d_logits;
    head_grads_.bias += d_logits.colwise().sum();
    if (!freeze_) {
      const Mat d_features = d_logits * head_.weight.transpose();
      Mat d_hidden = Mat::Zero(hidden.rows(), hidden.cols());
      if (rows.empty()) {
        if (pooling == Pooling::kMean) {
          d_hidden.rowwise() = d_features.row(0) / static_cast<float>(hidden.rows());
        } else {
          d_hidden.row(0) = d_features.row(0);
        }
      } else {
        for (std::size_t i = 0; i < rows.size(); ++i) {
          d_hidden.row(static_cast<Eigen::Index>(rows[i])) += d_features.row(static_cast<Eigen::Index>(i));
        }
      }
      backward_hidden(encoder_, cache, d_hidden, grads_);
    }
    return loss;
  }

  void step(int step_index) {
    adam_.step(params_, grad_ptrs_);
    for (const auto* t : params_) {
      if (!t->allFinite()) {
        throw Error(ErrorCode::kDivergence, fmt::format("non-finite parameters after fine-tuning step {}", step_index));
      }
    }
  }

 private:
  EncoderModel<float>& encoder_;
  LinearHead& head_;
  AdamOptimizer<float> adam_;
  bool freeze_;
  EncoderParams<float> grads_;
  HeadGrads head_grads_;
  std::vector<Mat*> params_;
  std::vector<const Mat*> grad_ptrs_;
};

// Runs the shuffled mini-batch loop; `example_fn(index, scale, dropout)`
// accumulates one example and returns its summed loss, `count_fn(index)` its
// number of supervised positions.
template <typename ExampleFn, typename CountFn>
void run_epochs(FineTuner& tuner, std::size_t n, const TrainSpec& spec, double dropout_rate, ExampleFn example_fn,
                CountFn count_fn) {
  std::vector<std::size_t> order(n);
  int step = 0;
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(spec.seed, fmt::format("finetune-epoch{}", epoch)));
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(spec.batch_size)) {
      if (spec.max_steps > 0 && step >= spec.max_steps) return;
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(spec.batch_size));
      std::size_t total = 0;
      for (std::size_t i = start; i < end; ++i) total += count_fn(order[i]);
      if (total == 0) continue;
      tuner.zero();
      const double scale = 1.0 / static_cast<double>(total);
      const std::uint64_t step_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(step));
      double loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const DropoutContext dropout{dropout_rate, derive_seed(step_seed, static_cast<std::uint64_t>(i - start))};
        loss += example_fn(order[i], scale, dropout_rate > 0.0 ? &dropout : nullptr);
      }
      if (!std::isfinite(loss)) {
        throw Error(ErrorCode::kDivergence, fmt::format("fine-tuning loss is not finite at step {}", step));
      }
      tuner.step(step);
      ++step;
    }
  }
}

struct FramedWords {
  std::vector<int> ids;
  std::vector<std::size_t> rows;  // hidden row of each word's first piece
};

FramedWords frame_words(std::span<const std::string> words, const Vocabulary& vocab, int max_seq_len) {
  const WordPieces pieces = encode_words(words, vocab);
  FramedWords out;
  out.ids = frame_sequence(pieces.ids, max_seq_len);
  const std::size_t last = out.ids.size() - 1;  // [SEP]
  for (const std::size_t start : pieces.word_starts) {
    if (start + 1 >= last) break;
    out.rows.push_back(start + 1);
  }
  return out;
}

std::vector<int> frame_text(std::string_view text, const Vocabulary& vocab, int max_seq_len) {
  const std::vector<int> ids = encode(text, vocab);
  return frame_sequence(ids, max_seq_len);
}

Mat head_logits(const LinearHead& head, const Mat& features) {
  Mat logits = features * head.weight;
  logits.rowwise() += head.bias.row(0);
  return logits;
}

void check_vocab(const EncoderModel<float>& encoder, const Vocabulary& vocab) {
  if (encoder.config.vocab_size != static_cast<int>(vocab.size())) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("encoder vocab_size {} does not match vocabulary size {}", encoder.config.vocab_size,
                            vocab.size()));
  }
}

std::string_view to_string(Pooling p) { return p == Pooling::kMean ? "mean" : "first"; }

Pooling parse_pooling(std::string_view s) {
  if (s == "first") return Pooling::kFirstToken;
  if (s == "mean") return Pooling::kMean;
  throw Error(ErrorCode::kParseError, fmt::format("unknown pooling '{}'", s));
}

}  // namespace

void TokenTaggingDataset::validate() const {
  if (tag_inventory.empty()) throw Error(ErrorCode::kInvalidArgument, "tag inventory is empty");
  const std::set<std::string> known(tag_inventory.begin(), tag_inventory.end());
  if (known.size() != tag_inventory.size()) throw Error(ErrorCode::kInvalidArgument, "tag inventory has duplicates");
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const auto& sent = sentences[s];
    if (sent.words.size() != sent.tags.size()) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("sentence {}: {} tokens but {} tags", s, sent.words.size(),
                                                           sent.tags.size()));
    }
    for (const auto& t : sent.tags) {
      if (!known.contains(t)) throw Error(ErrorCode::kInvalidArgument, fmt::format("sentence {}: unknown tag '{}'", s, t));
    }
  }
}

int TokenTaggingDataset::tag_index(std::string_view tag) const {
  const auto it = std::find(tag_inventory.begin(), tag_inventory.end(), tag);
  if (it == tag_inventory.end()) throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown tag '{}'", tag));
  return static_cast<int>(it - tag_inventory.begin());
}

TokenTaggingDataset parse_conll(std::string_view contents) {
  TokenTaggingDataset data;
  TaggedSentence current;
  std::set<std::string> seen;
  const auto flush = [&] {
    if (!current.words.empty()) data.sentences.push_back(std::move(current));
    current = {};
  };
  std::size_t line_no = 0;
  for (std::string line : split(contents, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.starts_with("# ")) continue;
    if (line.find_first_not_of(" \t") == std::string::npos) {
      flush();
      continue;
    }
    const auto fields = split(line, '\t');
    if (fields.size() < 2 || fields[0].empty() || fields.back().empty()) {
      throw Error(ErrorCode::kParseError, fmt::format("line {}: expected 'token<TAB>tag'", line_no));
    }
    current.words.push_back(fields[0]);
    current.tags.push_back(fields.back());
    if (seen.insert(fields.back()).second) data.tag_inventory.push_back(fields.back());
  }
  flush();
  return data;
}

TokenTaggingDataset load_conll(const std::string& path) { return parse_conll(read_file(path)); }

std::string conll_to_text(const TokenTaggingDataset& data) {
  std::string out;
  for (const auto& s : data.sentences) {
    for (std::size_t i = 0; i < s.words.size(); ++i) out += fmt::format("{}\t{}\n", s.words[i], s.tags[i]);
    out += '\n';
  }
  return out;
}

void DocLabelDataset::validate(const Corpus& corpus) const {
  const auto& space = label_space();
  for (const auto& l : labels) {
    if (std::find(space.begin(), space.end(), l.label) == space.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("label '{}' is outside the {} label space", l.label, to_string(sentiment)));
    }
    if (corpus.find(l.doc_id) == nullptr) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("document '{}' not found in corpus", l.doc_id));
    }
  }
}

std::map<Sentiment, DocLabelDataset> parse_doc_labels_csv(std::string_view contents) {
  std::map<Sentiment, DocLabelDataset> out;
  std::size_t line_no = 0;
  for (std::string line : split(contents, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split(line, ',');
    if (fields.size() != 3) throw Error(ErrorCode::kParseError, fmt::format("line {}: expected 3 columns", line_no));
    if (fields[0] == "document_id") continue;
    const Sentiment s = parse_sentiment(fields[1]);
    label_index(s, fields[2]);
    auto& ds = out[s];
    ds.sentiment = s;
    ds.labels.push_back({fields[0], fields[2]});
  }
  return out;
}

std::map<Sentiment, DocLabelDataset> load_doc_labels(const std::string& path) {
  return parse_doc_labels_csv(read_file(path));
}

std::string doc_labels_to_csv(const std::map<Sentiment, DocLabelDataset>& datasets) {
  std::string out = "document_id,sentiment_name,label\n";
  for (const auto& [s, ds] : datasets) {
    for (const auto& l : ds.labels) out += fmt::format("{},{},{}\n", l.doc_id, to_string(s), l.label);
  }
  return out;
}

std::vector<int> frame_sequence(std::span<const int> ids, int max_seq_len) {
  if (max_seq_len < 2) throw Error(ErrorCode::kInvalidArgument, "max_seq_len must be at least 2");
  const std::size_t keep = std::min(ids.size(), static_cast<std::size_t>(max_seq_len - 2));
  std::vector<int> out;
  out.reserve(keep + 2);
  out.push_back(kClsId);
  out.insert(out.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(keep));
  out.push_back(kSepId);
  return out;
}

TokenTagger fine_tune_token_tagger(EncoderModel<float> encoder, const Vocabulary& vocab,
                                   const TokenTaggingDataset& data, const TrainSpec& spec,
                                   const FineTuneOptions& options) {
  spec.validate();
  data.validate();
  check_vocab(encoder, vocab);
  if (data.sentences.empty()) throw Error(ErrorCode::kEmptyInput, "no tagged sentences");
  TokenTagger tagger;
  tagger.tags = data.tag_inventory;
  tagger.head = init_head(encoder.config.model_dim, static_cast<int>(tagger.tags.size()), options.head_seed);

  std::vector<FramedWords> framed;
  std::vector<std::vector<int>> targets;
  for (const auto& s : data.sentences) {
    framed.push_back(frame_words(s.words, vocab, encoder.config.max_seq_len));
    std::vector<int> t;
    for (std::size_t w = 0; w < framed.back().rows.size(); ++w) t.push_back(data.tag_index(s.tags[w]));
    targets.push_back(std::move(t));
  }

  FineTuner tuner(encoder, tagger.head, spec, options.freeze_encoder);
  const double dropout = options.freeze_encoder ? 0.0 : encoder.config.dropout;
  run_epochs(
      tuner, framed.size(), spec, dropout,
      [&](std::size_t i, double scale, const DropoutContext* d) {
        if (framed[i].rows.empty()) return 0.0;
        return tuner.accumulate(framed[i].ids, Pooling::kFirstToken, framed[i].rows, targets[i], scale, d);
      },
      [&](std::size_t i) { return framed[i].rows.size(); });
  tagger.encoder = std::move(encoder);
  return tagger;
}

std::vector<std::string> predict_tags(const TokenTagger& tagger, const Vocabulary& vocab,
                                      std::span<const std::string> words) {
  std::vector<std::string> out;
  if (words.empty()) return out;
  const FramedWords f = frame_words(words, vocab, tagger.encoder.config.max_seq_len);
  const Mat hidden = encode_hidden(tagger.encoder, f.ids);
  for (const std::size_t row : f.rows) {
    const Mat logits = head_logits(tagger.head, hidden.row(static_cast<Eigen::Index>(row)));
    Eigen::Index best = 0;
    logits.row(0).maxCoeff(&best);
    out.push_back(tagger.tags[static_cast<std::size_t>(best)]);
  }
  // Words cut off by max_seq_len get the first tag of the inventory.
  while (out.size() < words.size()) out.push_back(tagger.tags.front());
  return out;
}

MetricsReport evaluate_tagger(const TokenTagger& tagger, const Vocabulary& vocab, const TokenTaggingDataset& data) {
  std::vector<std::string> predicted, gold;
  for (const auto& s : data.sentences) {
    const auto p = predict_tags(tagger, vocab, s.words);
    predicted.insert(predicted.end(), p.begin(), p.end());
    gold.insert(gold.end(), s.tags.begin(), s.tags.end());
  }
  return evaluate(std::span<const std::string>(predicted), std::span<const std::string>(gold), tagger.tags);
}

std::vector<LabeledText> labeled_texts(const DocLabelDataset& data, const Corpus& corpus, std::optional<Split> split) {
  data.validate(corpus);
  std::vector<LabeledText> out;
  for (const auto& l : data.labels) {
    const Document* doc = corpus.find(l.doc_id);
    if (split && doc->split != *split) continue;
    out.push_back({doc->text, label_index(data.sentiment, l.label)});
  }
  return out;
}

DocClassifier fine_tune_doc_classifier(EncoderModel<float> encoder, const Vocabulary& vocab,
                                       std::span<const LabeledText> examples, std::vector<std::string> labels,
                                       const TrainSpec& spec, const FineTuneOptions& options) {
  spec.validate();
  check_vocab(encoder, vocab);
  if (labels.size() < 2) throw Error(ErrorCode::kInvalidArgument, "a classifier needs at least two labels");
  if (examples.empty()) throw Error(ErrorCode::kEmptyInput, "no labeled training documents");
  DocClassifier clf;
  clf.labels = std::move(labels);
  clf.pooling = options.pooling;
  std::vector<long> counts(clf.labels.size(), 0);
  for (const auto& e : examples) {
    if (e.label < 0 || e.label >= static_cast<int>(clf.labels.size())) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("label index {} out of range", e.label));
    }
    ++counts[static_cast<std::size_t>(e.label)];
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) {
      clf.warnings.push_back(fmt::format("class '{}' absent from training data; its recall is undefined", clf.labels[c]));
    }
  }
  clf.head = init_head(encoder.config.model_dim, static_cast<int>(clf.labels.size()), options.head_seed);

  std::vector<std::vector<int>> framed;
  framed.reserve(examples.size());
  for (const auto& e : examples) framed.push_back(frame_text(e.text, vocab, encoder.config.max_seq_len));

  FineTuner tuner(encoder, clf.head, spec, options.freeze_encoder);
  const double dropout = options.freeze_encoder ? 0.0 : encoder.config.dropout;
  run_epochs(
      tuner, framed.size(), spec, dropout,
      [&](std::size_t i, double scale, const DropoutContext* d) {
        const int target[] = {examples[i].label};
        return tuner.accumulate(framed[i], clf.pooling, {}, target, scale, d);
      },
      [](std::size_t) { return std::size_t{1}; });
  clf.encoder = std::move(encoder);
  return clf;
}

DocClassifier fine_tune_doc_classifier(EncoderModel<float> encoder, const Vocabulary& vocab,
                                       const DocLabelDataset& data, const Corpus& corpus, const TrainSpec& spec,
                                       const FineTuneOptions& options) {
  const bool has_splits = std::any_of(corpus.documents.begin(), corpus.documents.end(),
                                      [](const Document& d) { return d.split != Split::kUnassigned; });
  const auto examples = labeled_texts(data, corpus, has_splits ? std::optional<Split>(Split::kTrain) : std::nullopt);
  DocClassifier clf = fine_tune_doc_classifier(std::move(encoder), vocab, examples, data.label_space(), spec, options);
  clf.name = std::string(to_string(data.sentiment));
  return clf;
}

std::vector<double> predict_proba(const DocClassifier& classifier, const Vocabulary& vocab, std::string_view text) {
  const std::vector<int> ids = frame_text(text, vocab, classifier.encoder.config.max_seq_len);
  const Mat hidden = encode_hidden(classifier.encoder, ids);
  const Mat pooled = classifier.pooling == Pooling::kMean ? Mat(hidden.colwise().mean()) : Mat(hidden.row(0));
  const Mat probs = softmax_rows(head_logits(classifier.head, pooled));
  std::vector<double> out(static_cast<std::size_t>(probs.cols()));
  for (Eigen::Index c = 0; c < probs.cols(); ++c) out[static_cast<std::size_t>(c)] = probs(0, c);
  return out;
}

int predict_label(const DocClassifier& classifier, const Vocabulary& vocab, std::string_view text) {
  const auto p = predict_proba(classifier, vocab, text);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

MetricsReport evaluate_classifier(const DocClassifier& classifier, const Vocabulary& vocab,
                                  std::span<const LabeledText> examples) {
  std::vector<int> predicted, gold;
  for (const auto& e : examples) {
    predicted.push_back(predict_label(classifier, vocab, e.text));
    gold.push_back(e.label);
  }
  return evaluate(std::span<const int>(predicted), std::span<const int>(gold), classifier.labels);
}

std::map<Sentiment, DocClassifier> fine_tune_emotion_heads(const EncoderModel<float>& encoder, const Vocabulary& vocab,
                                                           const std::map<Sentiment, DocLabelDataset>& data,
                                                           const Corpus& corpus, const TrainSpec& spec,
                                                           const FineTuneOptions& options) {
  std::map<Sentiment, DocClassifier> out;
  for (const auto& [s, ds] : data) {
    if (!is_emotion(s)) continue;
    TrainSpec head_spec = spec;
    head_spec.seed = derive_seed(spec.seed, to_string(s));
    FineTuneOptions head_options = options;
    head_options.head_seed = derive_seed(options.head_seed, to_string(s));
    out.emplace(s, fine_tune_doc_classifier(encoder, vocab, ds, corpus, head_spec, head_options));
  }
  return out;
}

Checkpoint tagger_to_checkpoint(const TokenTagger& tagger) {
  Checkpoint ckpt;
  add_encoder(ckpt, tagger.encoder);
  ckpt.add("head.weight", tagger.head.weight);
  ckpt.add("head.bias", tagger.head.bias);
  ckpt.meta["kind"] = "token_tagger";
  ckpt.meta["tags"] = tagger.tags;
  return ckpt;
}

TokenTagger tagger_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.meta.value("kind", "") != "token_tagger") throw Error(ErrorCode::kParseError, "checkpoint is not a token tagger");
  TokenTagger tagger;
  tagger.encoder = encoder_from_checkpoint(ckpt);
  tagger.head = {ckpt.matrix("head.weight"), ckpt.matrix("head.bias")};
  tagger.tags = ckpt.meta.at("tags").get<std::vector<std::string>>();
  return tagger;
}

Checkpoint classifier_to_checkpoint(const DocClassifier& classifier) {
  Checkpoint ckpt;
  add_encoder(ckpt, classifier.encoder);
  ckpt.add("head.weight", classifier.head.weight);
  ckpt.add("head.bias", classifier.head.bias);
  ckpt.meta["kind"] = "doc_classifier";
  ckpt.meta["name"] = classifier.name;
  ckpt.meta["labels"] = classifier.labels;
  ckpt.meta["pooling"] = to_string(classifier.pooling);
  ckpt.meta["warnings"] = classifier.warnings;
  return ckpt;
}

DocClassifier classifier_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.meta.value("kind", "") != "doc_classifier") {
    throw Error(ErrorCode::kParseError, "checkpoint is not a document classifier");
  }
  DocClassifier clf;
  clf.encoder = encoder_from_checkpoint(ckpt);
  clf.head = {ckpt.matrix("head.weight"), ckpt.matrix("head.bias")};
  clf.labels = ckpt.meta.at("labels").get<std::vector<std::string>>();
  clf.pooling = parse_pooling(ckpt.meta.value("pooling", "first"));
  clf.name = ckpt.meta.value("name", "");
  clf.warnings = ckpt.meta.value("warnings", std::vector<std::string>{});
  return clf;
}

BootstrapResult bootstrap_evaluate(const EvaluationPipeline& pipeline, const Corpus& corpus, int n_samples,
                                   std::uint64_t seed) {
  if (n_samples < 2) throw Error(ErrorCode::kInvalidArgument, "bootstrap needs at least 2 samples");
  BootstrapResult result;
  std::map<std::string, std::vector<double>> values;
  for (int i = 0; i < n_samples; ++i) {
    const std::uint64_t sample_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    const Corpus partitioned = split_dataset(corpus, sample_seed);
    MetricsReport report = pipeline(partitioned, sample_seed);
    values["accuracy"].push_back(report.accuracy);
    values["weighted_f1"].push_back(report.weighted_f1);
    for (std::size_t c = 0; c < report.labels.size(); ++c) {
      values["precision/" + report.labels[c]].push_back(report.per_class[c].precision);
      values["recall/" + report.labels[c]].push_back(report.per_class[c].recall);
      values["f1/" + report.labels[c]].push_back(report.per_class[c].f1);
    }
    result.samples.push_back(std::move(report));
  }
  for (const auto& [name, v] : values) result.summary[name] = summarize(v);
  return result;
}

nlohmann::json bootstrap_to_json(const BootstrapResult& result) {
  nlohmann::json j;
  j["n_samples"] = result.samples.size();
  for (const auto& [name, s] : result.summary) j["summary"][name] = summary_to_json(s);
  j["samples"] = nlohmann::json::array();
  for (const auto& r : result.samples) j["samples"].push_back(metrics_to_json(r));
  return j;
}

}  // namespace mrl
