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

#ifndef MRL_SYNTHETIC_HPP_
#define MRL_SYNTHETIC_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "mrl/annotation.hpp"
#include "mrl/corpus.hpp"
#include "mrl/lexicon.hpp"
#include "mrl/tasks.hpp"
#include "mrl/tokenizers.hpp"

namespace mrl {

// Generators for desk-scale experiments. All output is a pure function of the
// options, seed included. Words are written in Hebrew letters.

struct MrlCorpusOptions {
  int num_stems = 60;
  int train_sentences = 600;
  int test_sentences = 150;
  int words_per_sentence = 8;
  // Share of each stem's (prefix, suffix) combinations reserved for test.
  double held_out_fraction = 0.5;
  // Share of test words drawn from held-out forms.
  double test_unseen_rate = 0.5;
  std::uint64_t seed = 0;
};

struct InflectedForm {
  std::string text;
  int stem = 0;
  int prefix = -1;  // index into rules.prefixes, -1 for none
  int suffix = -1;
};

struct MrlCorpus {
  Corpus train;
  Corpus test;  // built only from held-out inflections
  MorphRuleTable rules;
  std::vector<std::string> stems;
  std::vector<InflectedForm> seen_forms;      // may occur in train
  std::vector<InflectedForm> held_out_forms;  // occur only in test
};

MrlCorpus generate_mrl_corpus(const MrlCorpusOptions& options);

// POS tags follow the suffix class; NER marks a fixed subset of "name" stems
// with B-PER / I-PER. Sentences draw inflections from the same stem set.
struct TaggingCorpus {
  TokenTaggingDataset pos_train, pos_test;
  TokenTaggingDataset ner_train, ner_test;
};
TaggingCorpus generate_tagging_corpus(const MrlCorpus& base, int train_sentences, int test_sentences,
                                      std::uint64_t seed);

// Sentences of `length` words over `vocabulary` distinct words.
Corpus generate_memorization_corpus(int sentences = 50, int length = 10, int vocabulary = 40, std::uint64_t seed = 0);

struct SentimentCorpusOptions {
  int num_documents = 400;
  int filler_words = 80;
  int signal_words = 4;  // per lexicon category
  int min_length = 6;
  int max_length = 10;
  double emotion_rate = 0.3;
  double positive_rate = 0.35;
  double negative_rate = 0.35;
  // Share of signal words entered into the lexicon.
  double lexicon_coverage = 0.5;
  std::uint64_t seed = 0;
};

struct SentimentCorpus {
  Corpus corpus;  // Document::labels holds the planted label of every sentiment
  SentimentLexicon lexicon;
  MorphRuleTable rules;
};

// Polarity and each emotion are planted by inserting inflected signal words of
// the matching category; the lexicon lists signal stems.
SentimentCorpus generate_sentiment_corpus(const SentimentCorpusOptions& options);

// Labeled items over the nine sentiments with Plutchik structure: each
// opposing emotion pair is driven by one latent sign, so opposing emotions are
// never expressed together. About `missing_rate` of the items are left out.
std::vector<LabeledItem> generate_plutchik_pool(int comments, double missing_rate, std::uint64_t seed);

}  // namespace mrl

#endif  // MRL_SYNTHETIC_HPP_
