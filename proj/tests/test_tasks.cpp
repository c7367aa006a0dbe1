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

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "mrl/checkpoint.hpp"
#include "mrl/common.hpp"
#include "mrl/synthetic.hpp"
#include "mrl/tasks.hpp"
#include "mrl/tokenizers.hpp"

using namespace mrl;

namespace {

EncoderConfig small_config(int vocab) {
  EncoderConfig c;
  c.num_layers = 1;
  c.num_heads = 2;
  c.model_dim = 32;
  c.ffn_dim = 64;
  c.max_seq_len = 32;
  c.vocab_size = vocab;
  return c;
}

TrainSpec spec(int epochs, std::uint64_t seed = 1) {
  TrainSpec s;
  s.epochs = epochs;
  s.learning_rate = 3e-3;
  s.batch_size = 16;
  s.seed = seed;
  return s;
}

struct SentimentFixture {
  SentimentCorpus data;
  Corpus corpus;
  Vocabulary vocab;
  EncoderModel<float> encoder;
  DocLabelDataset polarity;
};

const SentimentFixture& sentiment_fixture() {
  static const SentimentFixture f = [] {
    SentimentFixture x;
    SentimentCorpusOptions o;
    o.num_documents = 300;
    o.seed = 4;
    x.data = generate_sentiment_corpus(o);
    x.corpus = split_dataset(x.data.corpus, 2);
    x.vocab = train_morpheme_vocab(x.corpus, x.data.rules, 400);
    x.encoder = init_encoder<float>(small_config(x.vocab.size()), 3);
    x.polarity.sentiment = Sentiment::kPolarity;
    for (const auto& d : x.corpus.documents) x.polarity.labels.push_back({d.id, d.labels.at("polarity")});
    return x;
  }();
  return f;
}

}  // namespace

TEST_CASE("conll parsing keeps first-seen tag order") {
  const auto d = parse_conll("a\tB-PER\nb\tO\n\nc\tO\nd\tI-PER\n");
  REQUIRE(d.sentences.size() == 2);
  CHECK(d.tag_inventory == std::vector<std::string>{"B-PER", "O", "I-PER"});
  CHECK(d.tag_index("O") == 1);
  CHECK(parse_conll(conll_to_text(d)).sentences[1].words == d.sentences[1].words);
  CHECK_THROWS_AS(parse_conll("a\n"), Error);
  CHECK(parse_conll("").sentences.empty());
}

TEST_CASE("framing adds cls and sep and truncates") {
  const std::vector<int> ids{7, 8, 9, 10};
  CHECK(frame_sequence(ids, 10) == std::vector<int>{kClsId, 7, 8, 9, 10, kSepId});
  CHECK(frame_sequence(ids, 4) == std::vector<int>{kClsId, 7, 8, kSepId});
}

TEST_CASE("doc label csv round trips and validates") {
  const auto m = parse_doc_labels_csv("document_id,sentiment,label\nd0,polarity,positive\nd1,joy,expressed\n");
  REQUIRE(m.size() == 2);
  CHECK(m.at(Sentiment::kJoy).labels[0].doc_id == "d1");
  CHECK(parse_doc_labels_csv(doc_labels_to_csv(m)).at(Sentiment::kPolarity).labels[0].label == "positive");
  const Corpus c = Corpus::from_texts({"x", "y"});
  m.at(Sentiment::kPolarity).validate(c);
  DocLabelDataset bad{Sentiment::kJoy, {{"d0", "happy"}}};
  CHECK_THROWS_AS(bad.validate(c), Error);
  DocLabelDataset missing{Sentiment::kJoy, {{"zz", "expressed"}}};
  CHECK_THROWS_AS(missing.validate(c), Error);
}

TEST_CASE("token tagger learns suffix-driven tags and fine-tuning beats a frozen encoder") {
  MrlCorpusOptions o;
  o.num_stems = 20;
  o.train_sentences = 150;
  o.seed = 6;
  const MrlCorpus base = generate_mrl_corpus(o);
  const TaggingCorpus tc = generate_tagging_corpus(base, 120, 40, 8);
  const Vocabulary vocab = train_morpheme_vocab(base.train, base.rules, 200);
  const auto encoder = init_encoder<float>(small_config(vocab.size()), 2);
  FineTuneOptions frozen;
  frozen.freeze_encoder = true;
  const TokenTagger tuned = fine_tune_token_tagger(encoder, vocab, tc.pos_train, spec(20));
  const TokenTagger fixed = fine_tune_token_tagger(encoder, vocab, tc.pos_train, spec(20), frozen);
  const double f_tuned = evaluate_tagger(tuned, vocab, tc.pos_test).weighted_f1;
  const double f_fixed = evaluate_tagger(fixed, vocab, tc.pos_test).weighted_f1;
  // Half of the test words are inflections never seen in training.
  CHECK(evaluate_tagger(tuned, vocab, tc.pos_train).weighted_f1 >= 0.95);
  CHECK(f_tuned >= 0.75);
  CHECK(f_tuned >= f_fixed);
  // Frozen training leaves the encoder untouched.
  CHECK(fixed.encoder.params.tok_emb == encoder.params.tok_emb);

  const auto tags = predict_tags(tuned, vocab, tc.pos_test.sentences[0].words);
  CHECK(tags.size() == tc.pos_test.sentences[0].words.size());
  const TokenTagger back = tagger_from_checkpoint(deserialize_checkpoint(serialize_checkpoint(tagger_to_checkpoint(tuned))));
  CHECK(predict_tags(back, vocab, tc.pos_test.sentences[0].words) == tags);
}

TEST_CASE("document classifier learns planted polarity") {
  const auto& f = sentiment_fixture();
  const auto train = labeled_texts(f.polarity, f.corpus, Split::kTrain);
  const auto test = labeled_texts(f.polarity, f.corpus, Split::kTest);
  CHECK(train.size() + test.size() + labeled_texts(f.polarity, f.corpus, Split::kValidation).size() == 300);
  const DocClassifier clf =
      fine_tune_doc_classifier(f.encoder, f.vocab, train, label_space(Sentiment::kPolarity), spec(15));
  CHECK(evaluate_classifier(clf, f.vocab, test).weighted_f1 >= 0.9);
  const auto p = predict_proba(clf, f.vocab, test[0].text);
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(clf.warnings.empty());

  const DocClassifier back =
      classifier_from_checkpoint(deserialize_checkpoint(serialize_checkpoint(classifier_to_checkpoint(clf))));
  for (const auto& ex : test) CHECK(predict_label(back, f.vocab, ex.text) == predict_label(clf, f.vocab, ex.text));
}

TEST_CASE("classes absent from training are reported") {
  const auto& f = sentiment_fixture();
  std::vector<LabeledText> only_pos;
  for (const auto& ex : labeled_texts(f.polarity, f.corpus, Split::kTrain)) {
    if (ex.label != 0) only_pos.push_back(ex);
  }
  const DocClassifier clf =
      fine_tune_doc_classifier(f.encoder, f.vocab, only_pos, label_space(Sentiment::kPolarity), spec(1));
  REQUIRE(clf.warnings.size() == 1);
  CHECK(clf.warnings[0].find("negative") != std::string::npos);
  CHECK_THROWS_AS(fine_tune_doc_classifier(f.encoder, f.vocab, std::vector<LabeledText>{}, {"a", "b"}, spec(1)), Error);
}

TEST_CASE("emotion heads train independently") {
  const auto& f = sentiment_fixture();
  std::map<Sentiment, DocLabelDataset> data;
  for (const Sentiment s : {Sentiment::kJoy, Sentiment::kFear}) {
    DocLabelDataset ds{s, {}};
    for (const auto& d : f.corpus.documents) ds.labels.push_back({d.id, d.labels.at(std::string(to_string(s)))});
    data[s] = ds;
  }
  const auto both = fine_tune_emotion_heads(f.encoder, f.vocab, data, f.corpus, spec(2));
  const auto joy_only =
      fine_tune_emotion_heads(f.encoder, f.vocab, {{Sentiment::kJoy, data.at(Sentiment::kJoy)}}, f.corpus, spec(2));
  CHECK(both.size() == 2);
  CHECK(both.at(Sentiment::kJoy).head.weight == joy_only.at(Sentiment::kJoy).head.weight);
  CHECK(both.at(Sentiment::kJoy).encoder.params.tok_emb == joy_only.at(Sentiment::kJoy).encoder.params.tok_emb);
  CHECK(both.at(Sentiment::kJoy).name == "joy");
}

TEST_CASE("bootstrap summarizes per-sample metrics") {
  const Corpus corpus = Corpus::from_texts(std::vector<std::string>(40, "x"));
  // A pipeline whose accuracy is the share of train documents among the first ten.
  const EvaluationPipeline pipeline = [](const Corpus& c, std::uint64_t) {
    std::vector<int> pred, gold;
    for (std::size_t i = 0; i < 10; ++i) {
      gold.push_back(1);
      pred.push_back(c.documents[i].split == Split::kTrain ? 1 : 0);
    }
    return evaluate(pred, gold, {"a", "b"});
  };
  const auto r = bootstrap_evaluate(pipeline, corpus, 12, 5);
  REQUIRE(r.samples.size() == 12);
  double sum = 0.0;
  for (const auto& s : r.samples) sum += s.accuracy;
  CHECK(r.summary.at("accuracy").mean == doctest::Approx(sum / 12));
  CHECK(r.summary.at("accuracy").n == 12);
  CHECK(r.summary.contains("f1/b"));
  CHECK(r.summary.contains("weighted_f1"));
  CHECK(r.summary.at("accuracy").stddev > 0.0);
  CHECK(bootstrap_to_json(r) == bootstrap_to_json(bootstrap_evaluate(pipeline, corpus, 12, 5)));
  CHECK_THROWS_AS(bootstrap_evaluate(pipeline, corpus, 1, 5), Error);
}
