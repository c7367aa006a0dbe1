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

#include "mrl/pipeline.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "mrl/annotation.hpp"
#include "mrl/checkpoint.hpp"
#include "mrl/common.hpp"
#include "mrl/corpus.hpp"
#include "mrl/encoder.hpp"
#include "mrl/lexicon.hpp"
#include "mrl/loop.hpp"
#include "mrl/metrics.hpp"
#include "mrl/synthetic.hpp"
#include "mrl/tasks.hpp"
#include "mrl/tokenizers.hpp"

namespace mrl {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Stage {
  const json& params;
  const StageContext& ctx;
  std::string type;
  json outputs = json::array();

  json stamp() const { return artifact_stamp(ctx.manifest_digest, ctx.seed); }

  std::string resolve(const std::string& p) const {
    if (p.empty() || fs::path(p).is_absolute()) return p;
    return (fs::path(ctx.output_dir) / p).lexically_normal().string();
  }

  bool has(const std::string& key) const { return params.contains(key) && !params[key].is_null(); }

  std::string path(const std::string& key) const {
    if (!has(key)) throw Error(ErrorCode::kInvalidArgument, fmt::format("stage '{}' needs '{}'", type, key));
    return resolve(params[key].get<std::string>());
  }

  std::string path_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? resolve(params[key].get<std::string>()) : resolve(fallback);
  }

  std::string input(const std::string& key) const {
    const std::string p = path(key);
    if (!fs::exists(p)) throw Error(ErrorCode::kIoError, fmt::format("stage '{}': input {} does not exist", type, p));
    return p;
  }

  std::vector<std::string> inputs(const std::string& key) const {
    if (!has(key) || !params[key].is_array()) return {input(key)};
    std::vector<std::string> out;
    for (const auto& v : params[key]) {
      const std::string p = resolve(v.get<std::string>());
      if (!fs::exists(p)) throw Error(ErrorCode::kIoError, fmt::format("stage '{}': input {} does not exist", type, p));
      out.push_back(p);
    }
    if (out.empty()) throw Error(ErrorCode::kInvalidArgument, fmt::format("stage '{}': '{}' is an empty list", type, key));
    return out;
  }

  template <typename T>
  T get(const std::string& key, T fallback) const {
    return has(key) ? params[key].get<T>() : fallback;
  }

  void record(const std::string& p) { outputs.push_back(fs::relative(fs::absolute(p), fs::absolute(ctx.output_dir)).generic_string()); }

  void write_text(const std::string& p, std::string_view contents) {
    write_file(p, contents);
    record(p);
  }

  void write_csv(const std::string& p, const std::string& body) {
    const json s = stamp();
    write_text(p, fmt::format("# manifest_digest={} seed={} format_version={}\n{}", s["manifest_digest"].get<std::string>(),
                              ctx.seed, kFormatVersion, body));
  }

  void write_json(const std::string& p, const std::string& artifact, json j) {
    j["artifact"] = artifact;
    j["stamp"] = stamp();
    write_text(p, j.dump(2) + "\n");
  }

  void write_checkpoint(const std::string& p, Checkpoint ckpt) {
    ckpt.meta["stamp"] = stamp();
    save_checkpoint(ckpt, p);
    record(p);
  }

  json done(json summary = json::object()) {
    summary["outputs"] = outputs;
    return summary;
  }
};

std::string with_suffix(const std::string& p, const std::string& suffix) {
  fs::path path(p);
  return (path.parent_path() / (path.stem().string() + suffix)).string();
}

bool has_splits(const Corpus& c) {
  return std::any_of(c.documents.begin(), c.documents.end(), [](const Document& d) { return d.split != Split::kUnassigned; });
}

// Documents of one split; the whole corpus when no split is assigned.
Corpus subset(const Corpus& c, Split split) {
  if (!has_splits(c)) return c;
  Corpus out;
  for (const auto& d : c.documents) {
    if (d.split == split) out.documents.push_back(d);
  }
  return out;
}

Split split_param(const Stage& st, const std::string& key, Split fallback) {
  return st.has(key) ? parse_split(st.params[key].get<std::string>()) : fallback;
}

std::vector<std::vector<int>> framed_sequences(const Corpus& corpus, const Vocabulary& vocab, int max_seq_len) {
  std::vector<std::vector<int>> out;
  for (const auto& d : corpus.documents) {
    const auto ids = encode(d.text, vocab);
    if (!ids.empty()) out.push_back(frame_sequence(ids, max_seq_len));
  }
  return out;
}

Vocabulary train_vocab(const Corpus& corpus, Scheme scheme, int size, double trim_quantile, bool positional,
                       const std::optional<MorphRuleTable>& rules) {
  switch (scheme) {
    case Scheme::kChar:
      return train_char_vocab(corpus, positional);
    case Scheme::kSubwordNgram:
      return train_subword_vocab(corpus, size);
    case Scheme::kSubwordMorpheme:
      if (!rules) throw Error(ErrorCode::kInvalidArgument, "the morpheme scheme needs a rule table");
      return train_morpheme_vocab(corpus, *rules, size);
    case Scheme::kWord:
      return train_word_vocab(corpus, trim_quantile);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown scheme");
}

struct LmScore {
  double pseudo_perplexity = 0.0;
  std::size_t sentences = 0;
  std::size_t tokens = 0;
};

// Corpus-level mask-one-out pseudo-perplexity over the content tokens of each
// framed sentence.
LmScore score_lm(const EncoderModel<float>& model, const Vocabulary& vocab, const Corpus& corpus, std::size_t limit) {
  std::vector<double> lls;
  LmScore out;
  for (const auto& d : corpus.documents) {
    if (limit > 0 && out.sentences >= limit) break;
    const auto ids = encode(d.text, vocab);
    if (ids.empty()) continue;
    const auto framed = frame_sequence(ids, model.config.max_seq_len);
    const auto all = pseudo_log_likelihoods(model, framed);
    lls.insert(lls.end(), all.begin() + 1, all.end() - 1);
    ++out.sentences;
  }
  out.tokens = lls.size();
  out.pseudo_perplexity = pseudo_perplexity_from_log_probs(lls);
  return out;
}

DocLabelDataset labels_from_corpus(const Corpus& corpus, Sentiment s) {
  DocLabelDataset ds;
  ds.sentiment = s;
  const std::string name(to_string(s));
  for (const auto& d : corpus.documents) {
    if (const auto it = d.labels.find(name); it != d.labels.end()) ds.labels.push_back({d.id, it->second});
  }
  return ds;
}

std::vector<LabeledText> texts_for(const DocLabelDataset& ds, const Corpus& corpus, Split split) {
  return labeled_texts(ds, corpus, has_splits(corpus) ? std::optional<Split>(split) : std::nullopt);
}

FineTuneOptions finetune_options(const Stage& st) {
  FineTuneOptions o;
  o.freeze_encoder = st.get<bool>("freeze_encoder", false);
  const std::string pooling = st.get<std::string>("pooling", "first");
  if (pooling != "first" && pooling != "mean") throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown pooling '{}'", pooling));
  o.pooling = pooling == "mean" ? Pooling::kMean : Pooling::kFirstToken;
  o.head_seed = derive_seed(st.ctx.seed, "head");
  return o;
}

TrainSpec spec_param(const Stage& st, const std::string& key, TrainSpec defaults, std::uint64_t seed) {
  TrainSpec spec = st.has(key) ? train_spec_from_json(st.params[key], defaults) : defaults;
  spec.seed = seed;
  spec.validate();
  return spec;
}

EncoderConfig encoder_param(const Stage& st, int vocab_size) {
  EncoderConfig c = st.has("encoder") ? config_from_json(st.params["encoder"]) : EncoderConfig{};
  c.vocab_size = vocab_size;
  c.validate();
  return c;
}

std::map<Sentiment, DocLabelDataset> doc_labels_param(const Stage& st, const Corpus& corpus) {
  if (st.has("data")) return load_doc_labels(st.input("data"));
  std::map<Sentiment, DocLabelDataset> out;
  for (const Sentiment s : kAllSentiments) {
    auto ds = labels_from_corpus(corpus, s);
    if (!ds.labels.empty()) out[s] = std::move(ds);
  }
  return out;
}

// ---------------------------------------------------------------- stages

json stage_synth(Stage& st) {
  const std::string out = st.path_or("output", "data");
  const auto dir = [&](const std::string& name) { return (fs::path(out) / name).string(); };
  const json mrl = st.get<json>("mrl", json::object());
  MrlCorpusOptions mo;
  mo.num_stems = mrl.value("num_stems", mo.num_stems);
  mo.train_sentences = mrl.value("train_sentences", mo.train_sentences);
  mo.test_sentences = mrl.value("test_sentences", mo.test_sentences);
  mo.words_per_sentence = mrl.value("words_per_sentence", mo.words_per_sentence);
  mo.held_out_fraction = mrl.value("held_out_fraction", mo.held_out_fraction);
  mo.test_unseen_rate = mrl.value("test_unseen_rate", mo.test_unseen_rate);
  mo.seed = derive_seed(st.ctx.seed, "mrl");
  const MrlCorpus base = generate_mrl_corpus(mo);
  st.write_text(dir("mrl_train.jsonl"), corpus_to_jsonl(base.train));
  st.write_text(dir("mrl_test.jsonl"), corpus_to_jsonl(base.test));
  st.write_text(dir("rules.tsv"), rule_table_to_text(base.rules));

  const json tag = st.get<json>("tagging", json::object());
  const TaggingCorpus tc = generate_tagging_corpus(base, tag.value("train_sentences", 200), tag.value("test_sentences", 60),
                                                   derive_seed(st.ctx.seed, "tagging"));
  st.write_text(dir("pos_train.conll"), conll_to_text(tc.pos_train));
  st.write_text(dir("pos_test.conll"), conll_to_text(tc.pos_test));
  st.write_text(dir("ner_train.conll"), conll_to_text(tc.ner_train));
  st.write_text(dir("ner_test.conll"), conll_to_text(tc.ner_test));

  const json sent = st.get<json>("sentiment", json::object());
  SentimentCorpusOptions so;
  so.num_documents = sent.value("num_documents", so.num_documents);
  so.filler_words = sent.value("filler_words", so.filler_words);
  so.signal_words = sent.value("signal_words", so.signal_words);
  so.emotion_rate = sent.value("emotion_rate", so.emotion_rate);
  so.lexicon_coverage = sent.value("lexicon_coverage", so.lexicon_coverage);
  so.seed = derive_seed(st.ctx.seed, "sentiment");
  const SentimentCorpus sc = generate_sentiment_corpus(so);
  const Corpus split = split_dataset(sc.corpus, derive_seed(st.ctx.seed, "sentiment-split"));
  st.write_text(dir("sentiment.jsonl"), corpus_to_jsonl(split));
  std::map<Sentiment, DocLabelDataset> labels;
  for (const Sentiment s : kAllSentiments) labels[s] = labels_from_corpus(split, s);
  st.write_csv(dir("sentiment_labels.csv"), doc_labels_to_csv(labels));
  st.write_text(dir("lexicon.tsv"), lexicon_to_tsv(sc.lexicon));
  st.write_text(dir("sentiment_rules.tsv"), rule_table_to_text(sc.rules));

  const json mem = st.get<json>("memorization", json::object());
  const Corpus memo = generate_memorization_corpus(mem.value("sentences", 50), mem.value("length", 10),
                                                   mem.value("vocabulary", 40), derive_seed(st.ctx.seed, "memorization"));
  st.write_text(dir("memorization.jsonl"), corpus_to_jsonl(memo));

  const json plu = st.get<json>("plutchik", json::object());
  const auto pool = generate_plutchik_pool(plu.value("comments", 500), plu.value("missing_rate", 0.1),
                                           derive_seed(st.ctx.seed, "plutchik"));
  st.write_csv(dir("plutchik_pool.csv"), labeled_pool_to_csv(pool));

  json summary{{"mrl_train", base.train.size()}, {"mrl_test", base.test.size()}, {"sentiment_documents", split.size()},
               {"lexicon_terms", sc.lexicon.size()}, {"plutchik_items", pool.size()}};
  st.write_json(dir("synth.json"), "synth", summary);
  return st.done(summary);
}

json stage_ingest(Stage& st) {
  const auto raw = read_documents_jsonl(st.input("input"));
  CleanOptions options;
  options.min_words = st.get<std::size_t>("min_words", options.min_words);
  if (st.has("script")) {
    const std::string s = st.params["script"].get<std::string>();
    options.script = s == "hebrew" ? ScriptPredicate::hebrew() : (s == "latin" ? ScriptPredicate::latin() : ScriptPredicate::parse(s));
  }
  Corpus corpus = ingest(raw, options);
  if (st.get<bool>("split", true)) {
    SplitFractions f;
    if (st.has("fractions")) {
      f.train = st.params["fractions"].value("train", f.train);
      f.validation = st.params["fractions"].value("validation", f.validation);
      f.test = st.params["fractions"].value("test", f.test);
    }
    corpus = split_dataset(corpus, f, st.ctx.seed);
  }
  const std::string out = st.path_or("output", "corpus.jsonl");
  st.write_text(out, corpus_to_jsonl(corpus));
  const json prov = json::parse(provenance_to_json(corpus.provenance));
  st.write_json(with_suffix(out, ".provenance.json"), "provenance", {{"provenance", prov}, {"documents", corpus.size()}});
  return st.done({{"documents", corpus.size()}, {"provenance", prov}});
}

json stage_tokenizer(Stage& st) {
  const Corpus corpus = read_corpus_jsonl(st.input("corpus"));
  const Scheme scheme = parse_scheme(st.get<std::string>("scheme", "subword"));
  std::optional<MorphRuleTable> rules;
  if (st.has("rules")) rules = load_rule_table(st.input("rules"));
  const Corpus train = subset(corpus, Split::kTrain);
  const Vocabulary vocab = train_vocab(train, scheme, st.get<int>("size", 1000), st.get<double>("trim_quantile", 0.05),
                                       st.get<bool>("positional", false), rules);
  const std::string out = st.path_or("output", fmt::format("vocab_{}.txt", to_string(scheme)));
  const json s = st.stamp();
  st.write_text(out, fmt::format("# manifest_digest={}\n# seed={}\n{}", s["manifest_digest"].get<std::string>(), st.ctx.seed,
                                 vocabulary_to_text(vocab)));
  json summary{{"scheme", to_string(scheme)}, {"size", vocab.size()}, {"truncated", vocab.truncated()}};
  if (has_splits(corpus)) {
    const Corpus test = subset(corpus, Split::kTest);
    if (!test.documents.empty()) summary["test_oov_rate"] = oov_rate(vocab, test);
  }
  return st.done(summary);
}

json stage_mlm(Stage& st) {
  const Corpus corpus = read_corpus_jsonl(st.input("corpus"));
  const Vocabulary vocab = load_vocabulary(st.input("vocab"));
  const EncoderConfig config = encoder_param(st, vocab.size());
  const TrainSpec spec = spec_param(st, "train", TrainSpec{}, st.ctx.seed);
  const auto sequences = framed_sequences(subset(corpus, Split::kTrain), vocab, config.max_seq_len);
  auto result = train_mlm(init_encoder<float>(config, derive_seed(st.ctx.seed, "init")), sequences, spec);
  const std::string out = st.path_or("output", "mlm.ckpt");
  Checkpoint ckpt;
  add_encoder(ckpt, result.model);
  ckpt.meta["kind"] = "encoder";
  ckpt.meta["train_spec"] = train_spec_to_json(spec);
  ckpt.meta["vocab_corpus_digest"] = vocab.corpus_digest();
  st.write_checkpoint(out, std::move(ckpt));
  st.write_csv(st.has("loss_curve") ? st.path("loss_curve") : with_suffix(out, ".loss.csv"), loss_curve_to_csv(result.curve));
  return st.done({{"steps", result.curve.size()},
                  {"final_loss", result.curve.empty() ? 0.0 : result.curve.back().loss},
                  {"parameters", result.model.params.parameter_count()}});
}

json stage_eval_lm(Stage& st) {
  const auto model = encoder_from_checkpoint(load_checkpoint(st.input("checkpoint")));
  const Vocabulary vocab = load_vocabulary(st.input("vocab"));
  const Corpus corpus = read_corpus_jsonl(st.input("corpus"));
  const Corpus eval = subset(corpus, split_param(st, "split", Split::kTest));
  const LmScore lm = score_lm(model, vocab, eval, st.get<std::size_t>("max_sentences", 0));
  json summary{{"pseudo_perplexity", lm.pseudo_perplexity}, {"sentences", lm.sentences}, {"tokens", lm.tokens},
               {"oov_rate", oov_rate(vocab, eval)}, {"scheme", to_string(vocab.scheme())}};
  st.write_json(st.path_or("output", "lm_eval.json"), "lm_eval", summary);
  return st.done(summary);
}

json stage_finetune(Stage& st) {
  const std::string task = st.get<std::string>("task", "");
  const auto encoder = encoder_from_checkpoint(load_checkpoint(st.input("checkpoint")));
  const Vocabulary vocab = load_vocabulary(st.input("vocab"));
  const TrainSpec spec = spec_param(st, "train", TrainSpec{}, st.ctx.seed);
  const FineTuneOptions options = finetune_options(st);
  if (task == "ner" || task == "pos") {
    const auto data = load_conll(st.input("data"));
    const TokenTagger tagger = fine_tune_token_tagger(encoder, vocab, data, spec, options);
    Checkpoint ckpt = tagger_to_checkpoint(tagger);
    ckpt.meta["task"] = task;
    st.write_checkpoint(st.path_or("output", task + ".ckpt"), std::move(ckpt));
    return st.done({{"task", task}, {"tags", tagger.tags}, {"sentences", data.sentences.size()}});
  }
  const Corpus corpus = read_corpus_jsonl(st.input("corpus"));
  const auto datasets = doc_labels_param(st, corpus);
  std::vector<Sentiment> targets;
  if (task == "polarity") {
    targets = {Sentiment::kPolarity};
  } else if (task == "emotions") {
    for (const Sentiment s : kAllSentiments) {
      if (is_emotion(s)) targets.push_back(s);
    }
  } else if (task.starts_with("emotion:")) {
    const Sentiment s = parse_sentiment(task.substr(8));
    if (!is_emotion(s)) throw Error(ErrorCode::kInvalidArgument, fmt::format("'{}' is not an emotion", task.substr(8)));
    targets = {s};
  } else {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown task '{}'", task));
  }
  json summary{{"task", task}, {"heads", json::object()}};
  const bool many = targets.size() > 1;
  const std::string out = st.path_or("output", many ? "emotions" : task + ".ckpt");
  for (const Sentiment s : targets) {
    const auto it = datasets.find(s);
    if (it == datasets.end()) throw Error(ErrorCode::kInsufficientData, fmt::format("no {} labels", to_string(s)));
    TrainSpec head_spec = spec;
    head_spec.seed = many ? derive_seed(spec.seed, to_string(s)) : spec.seed;
    FineTuneOptions head_options = options;
    if (many) head_options.head_seed = derive_seed(options.head_seed, to_string(s));
    const DocClassifier clf = fine_tune_doc_classifier(encoder, vocab, it->second, corpus, head_spec, head_options);
    const std::string path = many ? (fs::path(out) / fmt::format("{}.ckpt", to_string(s))).string() : out;
    st.write_checkpoint(path, classifier_to_checkpoint(clf));
    summary["heads"][std::string(to_string(s))] = {{"warnings", clf.warnings}};
  }
  return st.done(summary);
}

json stage_evaluate(Stage& st) {
  const Checkpoint ckpt = load_checkpoint(st.input("model"));
  const Vocabulary vocab = load_vocabulary(st.input("vocab"));
  const std::string kind = ckpt.meta.value("kind", "");
  MetricsReport report;
  json extra = json::object();
  if (kind == "token_tagger") {
    const TokenTagger tagger = tagger_from_checkpoint(ckpt);
    report = evaluate_tagger(tagger, vocab, load_conll(st.input("data")));
    extra["task"] = ckpt.meta.value("task", "tagging");
  } else if (kind == "doc_classifier") {
    const DocClassifier clf = classifier_from_checkpoint(ckpt);
    const Corpus corpus = read_corpus_jsonl(st.input("corpus"));
    const auto datasets = doc_labels_param(st, corpus);
    const Sentiment s = parse_sentiment(clf.name.empty() ? "polarity" : clf.name);
    const auto it = datasets.find(s);
    if (it == datasets.end()) throw Error(ErrorCode::kInsufficientData, fmt::format("no {} labels", to_string(s)));
    const auto examples = texts_for(it->second, corpus, split_param(st, "split", Split::kTest));
    if (examples.empty()) throw Error(ErrorCode::kEmptyInput, "no labeled documents to evaluate");
    report = evaluate_classifier(clf, vocab, examples);
    extra["task"] = clf.name;
    extra["warnings"] = clf.warnings;
  } else {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("checkpoint kind '{}' cannot be evaluated", kind));
  }
  json j = metrics_to_json(report);
  for (const auto& [k, v] : extra.items()) j[k] = v;
  st.write_json(st.path_or("output", "metrics.json"), "metrics", j);
  return st.done({{"weighted_f1", report.weighted_f1}, {"accuracy", report.accuracy}});
}

std::unique_ptr<Lemmatizer> make_lemmatizer(const Stage& st) {
  if (st.has("rules")) return std::make_unique<RuleLemmatizer>(load_rule_table(st.input("rules")));
  return std::make_unique<IdentityLemmatizer>();
}

json stage_lexicon(Stage& st) {
  const Corpus corpus = read_corpus_jsonl(st.input("corpus"));
  const SentimentLexicon lexicon = load_lexicon(st.input("lexicon"));
  const auto lemmatizer = make_lemmatizer(st);
  const Corpus docs = st.has("split") ? subset(corpus, split_param(st, "split", Split::kTrain)) : corpus;
  std::vector<std::pair<std::string, SentimentScores>> scores;
  for (const auto& d : docs.documents) scores.emplace_back(d.id, score_document(d, lexicon, *lemmatizer));
  st.write_csv(st.path_or("output", "scores.csv"), scores_to_csv(scores));
  return st.done({{"documents", scores.size()}, {"lexicon_terms", lexicon.size()},
                  {"duplicate_warnings", lexicon.duplicate_warnings}});
}

std::set<std::string> read_id_set(const std::string& path) {
  std::set<std::string> ids;
  for (auto line : read_lines(path)) {
    if (line.empty() || line[0] == '#') continue;
    const auto first = split(line, ',')[0];
    if (first != "comment_id" && first != "document_id") ids.insert(first);
  }
  return ids;
}

json stage_select(Stage& st) {
  const ScoreTable scores = parse_score_table_csv(read_file(st.input("scores")));
  const std::set<std::string> excluded = st.has("exclude") ? read_id_set(st.input("exclude")) : std::set<std::string>{};
  const SelectionResult sel = select_for_annotation(scores, st.get<std::size_t>("k", 75), excluded);
  json j = selection_to_json(sel);
  st.write_json(st.path_or("output", "selection.json"), "selection", j);
  return st.done({{"pre_dedup_count", sel.pre_dedup_count}, {"selected", sel.ids.size()}, {"warnings", sel.warnings}});
}

json stage_alpha(Stage& st) {
  const auto records = load_ratings(st.input("ratings"));
  const double threshold = st.get<double>("threshold", 0.75);
  const auto min_raters = st.get<std::size_t>("min_raters", 3);
  const ReliabilityReport report = filter_reliable(records, threshold, min_raters);
  json j = reliability_to_json(report);
  std::map<Sentiment, std::vector<std::vector<std::string>>> items;
  std::map<std::pair<std::string, Sentiment>, std::vector<std::string>> grouped;
  for (const auto& r : records) grouped[{r.comment_id, r.sentiment}].push_back(coarsen(r));
  for (auto& [key, labels] : grouped) items[key.second].push_back(std::move(labels));
  j["corpus_alpha"] = json::object();
  for (const auto& [s, its] : items) {
    try {
      j["corpus_alpha"][std::string(to_string(s))] = krippendorff_alpha(its);
    } catch (const Error&) {
      j["corpus_alpha"][std::string(to_string(s))] = nullptr;
    }
  }
  const std::string out = st.path_or("output", "reliability.json");
  st.write_json(out, "reliability", j);
  st.write_csv(st.has("pool") ? st.path("pool") : with_suffix(out, ".pool.csv"), labeled_pool_to_csv(consensus_labels(report)));
  return st.done({{"kept", report.kept_count()}, {"items", report.items.size()}, {"corpus_alpha", j["corpus_alpha"]}});
}

json stage_correlation(Stage& st) {
  const auto pool = parse_labeled_pool_csv(read_file(st.input("pool")));
  const CorrelationMatrix m = emotion_correlation(pool);
  const std::string out = st.path_or("output", "correlation.json");
  st.write_json(out, "correlation", correlation_to_json(m));
  st.write_csv(with_suffix(out, ".csv"), correlation_to_csv(m));
  return st.done({{"items", pool.size()}});
}

// Everything the annotation loop needs, rebuilt from recorded parameters on
// resume.
struct LoopResources {
  Corpus corpus;
  SentimentLexicon lexicon;
  std::unique_ptr<Lemmatizer> lemmatizer;
  EncoderModel<float> encoder;
  Vocabulary vocab{Scheme::kWord, {}};
  std::unique_ptr<RaterOracle> oracle;
};

// Recorded paths are relative to the loop directory so that reruns elsewhere
// produce identical state files.
LoopResources load_loop_resources(const json& p, const std::string& loop_dir, std::uint64_t seed, bool resuming) {
  const auto at = [&](const json& v) { return (fs::path(loop_dir) / v.get<std::string>()).lexically_normal().string(); };
  LoopResources r;
  r.corpus = read_corpus_jsonl(at(p.at("corpus")));
  if (!has_splits(r.corpus)) r.corpus = split_dataset(r.corpus, derive_seed(seed, "split"));
  r.lexicon = load_lexicon(at(p.at("lexicon")));
  if (p.contains("rules")) {
    r.lemmatizer = std::make_unique<RuleLemmatizer>(load_rule_table(at(p["rules"])));
  } else {
    r.lemmatizer = std::make_unique<IdentityLemmatizer>();
  }
  r.vocab = load_vocabulary(at(p.at("vocab")));
  if (p.contains("checkpoint")) {
    r.encoder = encoder_from_checkpoint(load_checkpoint(at(p["checkpoint"])));
  } else {
    EncoderConfig c = p.contains("encoder") ? config_from_json(p["encoder"]) : EncoderConfig{};
    c.vocab_size = r.vocab.size();
    c.validate();
    r.encoder = init_encoder<float>(c, derive_seed(seed, "encoder"));
  }
  const json oracle = p.value("oracle", json{{"kind", "synthetic"}});
  const std::string kind = oracle.value("kind", "synthetic");
  if (kind == "recorded") {
    r.oracle = std::make_unique<RecordedOracle>(load_ratings(at(oracle.at("ratings"))));
  } else if (kind == "synthetic") {
    SyntheticOracleOptions o;
    o.flip_rate = oracle.value("flip_rate", 0.0);
    o.raters_per_comment = oracle.value("raters", 3);
    o.batch_size = oracle.value("batch_size", 20);
    o.seed = derive_seed(seed, "oracle");
    o.fail_on_call = resuming ? -1 : oracle.value("fail_on_call", -1);
    r.oracle = std::make_unique<SyntheticOracle>(r.corpus, o);
  } else {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown oracle kind '{}'", kind));
  }
  return r;
}

json finish_loop(const std::string& dir, const LoopState& state, const json& stamp, json& outputs,
                 const std::string& output_dir) {
  const CorrelationMatrix m = emotion_correlation(state.pool);
  json cj = correlation_to_json(m);
  cj["artifact"] = "correlation";
  cj["stamp"] = stamp;
  const auto rel = [&](const std::string& p) {
    outputs.push_back(fs::relative(fs::absolute(p), fs::absolute(output_dir)).generic_string());
  };
  const std::string cpath = (fs::path(dir) / "correlation.json").string();
  write_file(cpath, cj.dump(2) + "\n");
  rel(cpath);
  json summary{{"status", state.status}, {"iterations", state.iteration}, {"pool_size", state.pool.size()},
               {"validation_size", state.validation.size()}, {"history", json::array()}};
  for (const auto& h : state.history) summary["history"].push_back(iteration_to_json(h));
  summary["final_mean_f1"] = state.history.empty() ? 0.0 : state.history.back().mean_f1;
  json lj = summary;
  lj["artifact"] = "loop";
  lj["stamp"] = stamp;
  const std::string lpath = (fs::path(dir) / "loop.json").string();
  write_file(lpath, lj.dump(2) + "\n");
  rel(lpath);
  return summary;
}

json stage_loop(Stage& st) {
  const std::string dir = st.path_or("output", "loop");
  const auto rel = [&](const std::string& path) { return fs::relative(fs::absolute(path), fs::absolute(dir)).generic_string(); };
  json p = json::object();
  for (const auto* key : {"corpus", "lexicon", "rules", "vocab", "checkpoint"}) {
    if (st.has(key)) p[key] = rel(st.input(key));
  }
  if (!st.has("vocab")) {
    // Train the vocabulary inline and keep it with the loop state.
    const Corpus corpus = read_corpus_jsonl(st.input("corpus"));
    std::optional<MorphRuleTable> rules;
    if (st.has("rules")) rules = load_rule_table(st.input("rules"));
    const Vocabulary vocab = train_vocab(subset(corpus, Split::kTrain), parse_scheme(st.get<std::string>("scheme", "morpheme")),
                                         st.get<int>("size", 400), st.get<double>("trim_quantile", 0.0), false, rules);
    const std::string vpath = (fs::path(dir) / "vocab.txt").string();
    st.write_text(vpath, vocabulary_to_text(vocab));
    p["vocab"] = "vocab.txt";
  }
  if (st.has("encoder")) p["encoder"] = st.params["encoder"];
  json oracle = st.get<json>("oracle", json{{"kind", "synthetic"}});
  if (oracle.contains("ratings")) oracle["ratings"] = rel(st.resolve(oracle["ratings"].get<std::string>()));
  p["oracle"] = oracle;

  LoopConfig config;
  config.k = st.get<std::size_t>("k", config.k);
  config.threshold = st.get<double>("threshold", config.threshold);
  config.min_raters = st.get<std::size_t>("min_raters", config.min_raters);
  config.max_iterations = st.get<int>("max_iterations", config.max_iterations);
  if (st.params.contains("convergence_epsilon")) {
    config.convergence_epsilon = st.params["convergence_epsilon"].is_null() ? std::numeric_limits<double>::infinity()
                                                                            : st.params["convergence_epsilon"].get<double>();
  }
  config.train = spec_param(st, "train", config.train, derive_seed(st.ctx.seed, "finetune"));
  config.finetune = finetune_options(st);
  config.seed = st.ctx.seed;

  LoopResources r = load_loop_resources(p, dir, st.ctx.seed, false);
  const LoopInputs inputs{r.corpus, r.lexicon, *r.lemmatizer, r.encoder, r.vocab, *r.oracle};
  json meta{{"params", p}, {"stamp", st.stamp()}, {"output_dir", rel(st.ctx.output_dir)}};
  const LoopState state = run_loop(inputs, config, dir, meta);
  st.record((fs::path(dir) / "state.json").string());
  return st.done(finish_loop(dir, state, st.stamp(), st.outputs, st.ctx.output_dir));
}

json stage_compare(Stage& st) {
  const auto rows = run_comparison(st.params, st.ctx);
  const std::string out = st.path_or("output", "comparison.csv");
  st.write_csv(out, comparison_to_csv(rows));
  json j;
  j["rows"] = json::array();
  bool failed = false;
  for (const auto& r : rows) {
    const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    j["rows"].push_back({{"arm", r.arm}, {"scheme", r.scheme}, {"pseudo_perplexity", opt(r.pseudo_perplexity)},
                         {"oov_rate", opt(r.oov_rate)}, {"ner_f1", opt(r.ner_f1)}, {"pos_f1", opt(r.pos_f1)},
                         {"polarity_f1", opt(r.polarity_f1)}, {"errors", r.errors}});
    failed = failed || !r.errors.empty();
  }
  st.write_json(with_suffix(out, ".json"), "comparison", j);
  if (failed) throw Error(ErrorCode::kInvalidArgument, fmt::format("comparison finished with failures; see {}", out));
  return st.done({{"arms", rows.size()}});
}

json stage_bootstrap(Stage& st) {
  const Corpus corpus = read_corpus_jsonl(st.input("corpus"));
  const Vocabulary vocab = load_vocabulary(st.input("vocab"));
  const auto encoder = encoder_from_checkpoint(load_checkpoint(st.input("checkpoint")));
  const Sentiment s = parse_sentiment(st.get<std::string>("sentiment", "polarity"));
  const TrainSpec spec = spec_param(st, "train", TrainSpec{}, st.ctx.seed);
  const FineTuneOptions options = finetune_options(st);
  const auto datasets = doc_labels_param(st, corpus);
  const auto it = datasets.find(s);
  if (it == datasets.end()) throw Error(ErrorCode::kInsufficientData, fmt::format("no {} labels", to_string(s)));
  const DocLabelDataset& ds = it->second;
  const EvaluationPipeline pipeline = [&](const Corpus& partitioned, std::uint64_t sample_seed) {
    TrainSpec sample_spec = spec;
    sample_spec.seed = sample_seed;
    const auto train = labeled_texts(ds, partitioned, Split::kTrain);
    const auto test = labeled_texts(ds, partitioned, Split::kTest);
    const DocClassifier clf = fine_tune_doc_classifier(encoder, vocab, train, label_space(s), sample_spec, options);
    return evaluate_classifier(clf, vocab, test);
  };
  const BootstrapResult result = bootstrap_evaluate(pipeline, corpus, st.get<int>("n_samples", 50), st.ctx.seed);
  json j = bootstrap_to_json(result);
  j["sentiment"] = to_string(s);
  st.write_json(st.path_or("output", "bootstrap.json"), "bootstrap", j);
  return st.done({{"n_samples", result.samples.size()},
                  {"weighted_f1_mean", result.summary.at("weighted_f1").mean}});
}

json stage_report(Stage& st) {
  const std::string dir = st.path_or("dir", ".");
  const Report r = build_report(dir);
  const fs::path out = st.has("output") ? fs::path(st.path("output")) : fs::path(dir) / "report";
  json summary = r.summary;
  st.write_json((out / "summary.json").string(), "report", summary);
  st.write_csv((out / "metrics.csv").string(), r.metrics_csv);
  st.write_csv((out / "bootstrap.csv").string(), r.bootstrap_csv);
  st.write_csv((out / "comparison.csv").string(), r.comparison_csv);
  return st.done({{"artifacts", summary["artifacts"].size()}, {"absent", summary["absent"]}, {"warnings", summary["warnings"]}});
}

std::string cell(const std::optional<double>& v, const std::map<std::string, std::string>& errors, const std::string& col,
                 double scale = 1.0) {
  if (errors.contains(col)) return "FAILED";
  return v ? fmt::format("{:.6f}", *v * scale) : std::string("NA");
}

}  // namespace

std::string default_output_root() {
  const char* env = std::getenv("MRL_OUTPUT_ROOT");
  return env != nullptr && *env != '\0' ? std::string(env) : std::string(".");
}

nlohmann::json execute_stage(const std::string& type, const nlohmann::json& params, const StageContext& ctx) {
  Stage st{params, ctx, type};
  if (type == "synth") return stage_synth(st);
  if (type == "ingest") return stage_ingest(st);
  if (type == "tokenizer") return stage_tokenizer(st);
  if (type == "mlm") return stage_mlm(st);
  if (type == "eval-lm") return stage_eval_lm(st);
  if (type == "finetune") return stage_finetune(st);
  if (type == "evaluate") return stage_evaluate(st);
  if (type == "lexicon") return stage_lexicon(st);
  if (type == "select") return stage_select(st);
  if (type == "alpha") return stage_alpha(st);
  if (type == "loop") return stage_loop(st);
  if (type == "correlation") return stage_correlation(st);
  if (type == "compare") return stage_compare(st);
  if (type == "bootstrap") return stage_bootstrap(st);
  if (type == "report") return stage_report(st);
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown stage type '{}'", type));
}

nlohmann::json resume_loop_stage(const std::string& state_dir) {
  const LoopState saved = load_loop_state(state_dir);
  const json& meta = saved.meta;
  if (!meta.contains("params")) throw Error(ErrorCode::kParseError, "loop state lacks its recorded inputs");
  const std::uint64_t seed = meta.at("stamp").at("seed").get<std::uint64_t>();
  LoopResources r = load_loop_resources(meta["params"], state_dir, seed, true);
  const LoopInputs inputs{r.corpus, r.lexicon, *r.lemmatizer, r.encoder, r.vocab, *r.oracle};
  const LoopState state = resume_loop(inputs, state_dir);
  json outputs = json::array();
  const std::string output_dir = (fs::path(state_dir) / meta.value("output_dir", ".")).lexically_normal().string();
  json summary = finish_loop(state_dir, state, meta["stamp"], outputs, output_dir);
  summary["outputs"] = outputs;
  return summary;
}

bool RunResult::ok() const {
  return std::all_of(stages.begin(), stages.end(), [](const StageOutcome& s) { return s.status == "ok" || s.status == "not_selected"; });
}

RunResult run_manifest(const ExperimentManifest& manifest, const std::string& output_root, const std::string& only_type) {
  RunResult result;
  fs::path out(manifest.output_dir);
  if (out.is_relative()) out = fs::path(output_root) / out;
  result.output_dir = out.lexically_normal().string();
  fs::create_directories(out);
  write_file((out / "manifest.json").string(), manifest.document.dump(2) + "\n");
  bool failed = false;
  for (const auto& stage : manifest.stages) {
    StageOutcome o{stage.id, stage.type, "skipped", "", json::object()};
    if (!only_type.empty() && stage.type != only_type) {
      o.status = "not_selected";
    } else if (!failed) {
      const StageContext ctx{result.output_dir, manifest.digest, manifest.seed_for(stage.id)};
      try {
        o.summary = execute_stage(stage.type, stage.params, ctx);
        o.status = "ok";
      } catch (const std::exception& e) {
        o.status = "failed";
        o.error = e.what();
        failed = true;
      }
    }
    result.stages.push_back(std::move(o));
  }
  json run;
  run["artifact"] = "run";
  run["stamp"] = artifact_stamp(manifest.digest, manifest.seed_for("default"));
  run["name"] = manifest.name;
  run["stages"] = json::array();
  for (const auto& s : result.stages) {
    json e{{"id", s.id}, {"type", s.type}, {"status", s.status}, {"summary", s.summary}};
    if (!s.error.empty()) e["error"] = s.error;
    run["stages"].push_back(std::move(e));
  }
  write_file((out / "run.json").string(), run.dump(2) + "\n");
  return result;
}

std::vector<ComparisonRow> run_comparison(const nlohmann::json& params, const StageContext& ctx) {
  Stage st{params, ctx, "compare"};
  // "pretrain" and "rules" take one path or a list; corpora concatenate, rule tables merge.
  Corpus pretrain;
  for (const auto& p : st.inputs("pretrain")) {
    const Corpus part = subset(read_corpus_jsonl(p), Split::kTrain);
    pretrain.documents.insert(pretrain.documents.end(), part.documents.begin(), part.documents.end());
  }
  const Corpus test = read_corpus_jsonl(st.input("test"));
  std::optional<MorphRuleTable> rules;
  if (st.has("rules")) {
    for (const auto& p : st.inputs("rules")) rules = rules ? merge_rule_tables(*rules, load_rule_table(p)) : load_rule_table(p);
  }
  json arms = st.get<json>("arms", json::array());
  if (arms.empty()) {
    arms = json::array({{{"name", "char"}, {"scheme", "char"}},
                        {{"name", "subword-small"}, {"scheme", "subword"}, {"size", 150}},
                        {{"name", "subword-large"}, {"scheme", "subword"}, {"size", 300}},
                        {{"name", "morpheme"}, {"scheme", "morpheme"}, {"size", 300}},
                        {{"name", "word"}, {"scheme", "word"}}});
  }
  const std::size_t pp_sentences = st.get<std::size_t>("pp_sentences", 20);
  std::optional<TokenTaggingDataset> pos_train, pos_test, ner_train, ner_test;
  if (st.has("pos_train")) pos_train = load_conll(st.input("pos_train")), pos_test = load_conll(st.input("pos_test"));
  if (st.has("ner_train")) ner_train = load_conll(st.input("ner_train")), ner_test = load_conll(st.input("ner_test"));
  std::optional<Corpus> polarity;
  if (st.has("polarity")) polarity = read_corpus_jsonl(st.input("polarity"));

  std::vector<ComparisonRow> rows;
  for (const auto& arm : arms) {
    ComparisonRow row;
    row.arm = arm.value("name", arm.value("scheme", "arm"));
    row.scheme = arm.value("scheme", "");
    const auto attempt = [&row](const std::string& column, const std::function<void()>& f) {
      try {
        f();
      } catch (const std::exception& e) {
        row.errors[column] = e.what();
      }
    };
    std::optional<Vocabulary> vocab;
    std::optional<EncoderModel<float>> model;
    attempt("vocabulary", [&] {
      vocab = train_vocab(pretrain, parse_scheme(row.scheme), arm.value("size", 1000), arm.value("trim_quantile", 0.05),
                          arm.value("positional", false), rules);
    });
    if (!vocab) {
      for (const auto* c : {"pseudo_perplexity", "oov_rate", "ner_f1", "pos_f1", "polarity_f1"}) row.errors[c] = row.errors["vocabulary"];
      rows.push_back(std::move(row));
      continue;
    }
    attempt("oov_rate", [&] { row.oov_rate = oov_rate(*vocab, test); });
    attempt("mlm", [&] {
      const EncoderConfig config = encoder_param(st, vocab->size());
      const TrainSpec spec = spec_param(st, "mlm", TrainSpec{}, derive_seed(ctx.seed, row.arm + "/mlm"));
      const auto seqs = framed_sequences(pretrain, *vocab, config.max_seq_len);
      model = train_mlm(init_encoder<float>(config, derive_seed(ctx.seed, row.arm + "/init")), seqs, spec).model;
    });
    if (!model) {
      for (const auto* c : {"pseudo_perplexity", "ner_f1", "pos_f1", "polarity_f1"}) row.errors[c] = row.errors["mlm"];
      rows.push_back(std::move(row));
      continue;
    }
    attempt("pseudo_perplexity", [&] { row.pseudo_perplexity = score_lm(*model, *vocab, test, pp_sentences).pseudo_perplexity; });
    const auto tagging = [&](const std::string& column, const std::optional<TokenTaggingDataset>& train,
                             const std::optional<TokenTaggingDataset>& eval, std::optional<double>& cell_value) {
      if (!train) return;
      attempt(column, [&] {
        const TrainSpec spec = spec_param(st, "finetune", TrainSpec{}, derive_seed(ctx.seed, row.arm + "/" + column));
        FineTuneOptions o;
        o.head_seed = derive_seed(ctx.seed, row.arm + "/" + column + "/head");
        const TokenTagger tagger = fine_tune_token_tagger(*model, *vocab, *train, spec, o);
        cell_value = evaluate_tagger(tagger, *vocab, *eval).weighted_f1;
      });
    };
    tagging("ner_f1", ner_train, ner_test, row.ner_f1);
    tagging("pos_f1", pos_train, pos_test, row.pos_f1);
    if (polarity) {
      attempt("polarity_f1", [&] {
        const TrainSpec spec = spec_param(st, "finetune", TrainSpec{}, derive_seed(ctx.seed, row.arm + "/polarity"));
        FineTuneOptions o;
        o.head_seed = derive_seed(ctx.seed, row.arm + "/polarity/head");
        const DocLabelDataset ds = labels_from_corpus(*polarity, Sentiment::kPolarity);
        const auto train = texts_for(ds, *polarity, Split::kTrain);
        const auto eval = texts_for(ds, *polarity, Split::kTest);
        const DocClassifier clf = fine_tune_doc_classifier(*model, *vocab, train, label_space(Sentiment::kPolarity), spec, o);
        row.polarity_f1 = evaluate_classifier(clf, *vocab, eval).weighted_f1;
      });
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string comparison_to_csv(const std::vector<ComparisonRow>& rows) {
  std::string out = "arm,scheme,pseudo_perplexity,oov_pct,ner_f1,pos_f1,polarity_f1\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.arm, r.scheme, cell(r.pseudo_perplexity, r.errors, "pseudo_perplexity"),
                       cell(r.oov_rate, r.errors, "oov_rate", 100.0), cell(r.ner_f1, r.errors, "ner_f1"),
                       cell(r.pos_f1, r.errors, "pos_f1"), cell(r.polarity_f1, r.errors, "polarity_f1"));
  }
  return out;
}

Report build_report(const std::string& dir) {
  Report r;
  json& s = r.summary;
  s["artifacts"] = json::array();
  s["absent"] = json::array();
  s["warnings"] = json::array();
  s["metrics"] = json::object();
  s["bootstrap"] = json::object();
  s["correlation"] = json::object();
  s["comparison"] = json::object();
  s["loop"] = json::object();
  r.metrics_csv = "source,label,precision,recall,f1,support,accuracy,weighted_f1\n";
  r.bootstrap_csv = "source,metric,mean,stddev,p2_5,p97_5,n\n";
  r.comparison_csv = "source,arm,scheme,pseudo_perplexity,oov_rate,ner_f1,pos_f1,polarity_f1\n";
  if (!fs::is_directory(dir)) {
    s["warnings"].push_back(fmt::format("{} is not a directory", dir));
    return r;
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".json") continue;
    const auto rel = fs::relative(e.path(), dir);
    if (!rel.empty() && *rel.begin() == "report") continue;
    files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  const auto num = [](const json& v) { return v.is_null() ? std::string("NA") : v.dump(); };
  for (const auto& f : files) {
    json j;
    try {
      j = json::parse(read_file(f.string()));
    } catch (const std::exception&) {
      continue;
    }
    if (!j.is_object() || !j.contains("artifact")) continue;
    const std::string kind = j["artifact"].get<std::string>();
    const std::string rel = fs::relative(f, dir).generic_string();
    s["artifacts"].push_back({{"path", rel}, {"artifact", kind}, {"stamp", j.value("stamp", json(nullptr))}});
    if (kind == "metrics") {
      s["metrics"][rel] = {{"accuracy", j["accuracy"]}, {"weighted_f1", j["weighted_f1"]}, {"per_class", j["per_class"]}};
      for (const auto& c : j["per_class"]) {
        r.metrics_csv += fmt::format("{},{},{},{},{},{},{},{}\n", rel, c["label"].get<std::string>(), num(c["precision"]),
                                     num(c["recall"]), num(c["f1"]), num(c["support"]), num(j["accuracy"]),
                                     num(j["weighted_f1"]));
      }
    } else if (kind == "bootstrap") {
      s["bootstrap"][rel] = j["summary"];
      for (const auto& [metric, v] : j["summary"].items()) {
        r.bootstrap_csv += fmt::format("{},{},{},{},{},{},{}\n", rel, metric, num(v["mean"]), num(v["stddev"]),
                                       num(v["p2_5"]), num(v["p97_5"]), num(v["n"]));
      }
    } else if (kind == "correlation") {
      s["correlation"][rel] = {{"sentiments", j["sentiments"]}, {"r", j["r"]}};
    } else if (kind == "comparison") {
      s["comparison"][rel] = j["rows"];
      for (const auto& row : j["rows"]) {
        r.comparison_csv += fmt::format("{},{},{},{},{},{},{},{}\n", rel, row["arm"].get<std::string>(),
                                        row["scheme"].get<std::string>(), num(row["pseudo_perplexity"]),
                                        num(row["oov_rate"]), num(row["ner_f1"]), num(row["pos_f1"]),
                                        num(row["polarity_f1"]));
      }
    } else if (kind == "loop") {
      s["loop"][rel] = {{"status", j["status"]}, {"iterations", j["iterations"]}, {"final_mean_f1", j["final_mean_f1"]}};
    } else if (kind == "selection") {
      s["selection"][rel] = {{"pre_dedup_count", j["pre_dedup_count"]}, {"selected_count", j["selected_count"]}};
      s["selection"][rel]["note"] =
          "pre-dedup count is 2k per sentiment (1350 for k=75 over 9 sentiments); the deduplicated set can only be smaller";
    }
  }
  const fs::path run = fs::path(dir) / "run.json";
  if (fs::exists(run)) {
    const json j = json::parse(read_file(run.string()));
    for (const auto& stage : j.value("stages", json::array())) {
      const std::string id = stage.value("id", "");
      if (stage.value("status", "") == "not_selected") continue;
      if (stage.value("status", "") != "ok") {
        s["absent"].push_back({{"stage", id}, {"reason", stage.value("status", "")}});
        continue;
      }
      for (const auto& o : stage["summary"].value("outputs", json::array())) {
        if (!fs::exists(fs::path(dir) / o.get<std::string>())) {
          s["absent"].push_back({{"stage", id}, {"reason", "missing output"}, {"path", o}});
        }
      }
    }
  }
  if (s["artifacts"].empty()) s["warnings"].push_back("no stage outputs found");
  return r;
}

}  // namespace mrl
