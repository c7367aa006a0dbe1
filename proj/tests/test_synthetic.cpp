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

#include <map>
#include <set>

#include "doctest.h"
#include "mrl/annotation.hpp"
#include "mrl/corpus.hpp"
#include "mrl/synthetic.hpp"
#include "mrl/utf8.hpp"

using namespace mrl;

namespace {

std::set<std::string> words_of(const Corpus& c) {
  std::set<std::string> out;
  for (const auto& d : c.documents) {
    for (auto w : utf8::split_words(d.text)) out.emplace(w);
  }
  return out;
}

}  // namespace

TEST_CASE("mrl corpus keeps held-out inflections out of training") {
  MrlCorpusOptions o;
  o.num_stems = 25;
  o.train_sentences = 200;
  o.test_sentences = 50;
  o.seed = 9;
  const MrlCorpus m = generate_mrl_corpus(o);
  CHECK(m.train.size() == 200);
  CHECK(m.test.size() == 50);
  CHECK(m.stems.size() == 25);
  const auto train_words = words_of(m.train);
  std::set<std::string> held;
  for (const auto& f : m.held_out_forms) held.insert(f.text);
  for (const auto& w : train_words) CHECK_FALSE(held.contains(w));
  std::size_t unseen = 0, total = 0;
  for (const auto& d : m.test.documents) {
    for (auto w : utf8::split_words(d.text)) {
      ++total;
      unseen += !train_words.contains(std::string(w));
    }
  }
  CHECK(static_cast<double>(unseen) / total > 0.3);
  CHECK(corpus_to_jsonl(generate_mrl_corpus(o).train) == corpus_to_jsonl(m.train));
  o.seed = 10;
  CHECK(corpus_to_jsonl(generate_mrl_corpus(o).train) != corpus_to_jsonl(m.train));
}

TEST_CASE("tagging corpus aligns words and tags") {
  MrlCorpusOptions o;
  o.num_stems = 12;
  o.train_sentences = 20;
  const TaggingCorpus tc = generate_tagging_corpus(generate_mrl_corpus(o), 30, 10, 1);
  CHECK(tc.pos_train.sentences.size() == 30);
  CHECK(tc.ner_test.sentences.size() == 10);
  tc.pos_train.validate();
  tc.ner_train.validate();
  for (const auto& s : tc.ner_train.sentences) {
    for (std::size_t i = 0; i < s.tags.size(); ++i) {
      if (s.tags[i] == "I-PER") CHECK((i > 0 && s.tags[i - 1] != "O"));
    }
  }
}

TEST_CASE("memorization corpus has the requested shape") {
  const Corpus c = generate_memorization_corpus(50, 10, 40, 2);
  CHECK(c.size() == 50);
  for (const auto& d : c.documents) CHECK(utf8::split_words(d.text).size() == 10);
  CHECK(words_of(c).size() <= 40);
}

TEST_CASE("sentiment corpus plants every label and the lexicon covers signal stems") {
  SentimentCorpusOptions o;
  o.num_documents = 200;
  o.seed = 5;
  const SentimentCorpus sc = generate_sentiment_corpus(o);
  CHECK(sc.corpus.size() == 200);
  CHECK(sc.lexicon.size() > 0);
  CHECK(sc.rules.prefixes.empty());
  std::map<std::string, int> polarity;
  for (const auto& d : sc.corpus.documents) {
    CHECK(d.labels.size() == kNumSentiments);
    ++polarity[d.labels.at("polarity")];
    for (const auto& [name, label] : d.labels) {
      const auto s = parse_sentiment(name);
      CHECK(label_index(s, label) >= 0);
    }
  }
  CHECK(polarity.size() == 3);
}

TEST_CASE("plutchik pool never expresses opposing emotions together") {
  const auto pool = generate_plutchik_pool(500, 0.1, 7);
  std::map<std::string, std::map<Sentiment, std::string>> by_comment;
  for (const auto& item : pool) by_comment[item.comment_id][item.sentiment] = item.label;
  CHECK(by_comment.size() == 500);
  const std::pair<Sentiment, Sentiment> pairs[] = {{Sentiment::kJoy, Sentiment::kSadness},
                                                   {Sentiment::kTrust, Sentiment::kDisgust},
                                                   {Sentiment::kAnger, Sentiment::kFear},
                                                   {Sentiment::kSurprise, Sentiment::kAnticipation}};
  for (const auto& [id, labels] : by_comment) {
    for (const auto& [a, b] : pairs) {
      if (labels.contains(a) && labels.contains(b)) {
        CHECK_FALSE((labels.at(a) == "expressed" && labels.at(b) == "expressed"));
      }
    }
  }
  const double kept = static_cast<double>(pool.size()) / (500.0 * kNumSentiments);
  CHECK(kept == doctest::Approx(0.9).epsilon(0.03));
}
