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

#include "mrl/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "mrl/random.hpp"
#include "mrl/utf8.hpp"

namespace mrl {

namespace {

// Non-final Hebrew letters.
const std::vector<std::string>& letters() {
  static const std::vector<std::string> kLetters = [] {
    std::vector<std::string> out;
    for (char32_t cp = 0x05D0; cp <= 0x05EA; ++cp) {
      if (cp == 0x05DA || cp == 0x05DD || cp == 0x05DF || cp == 0x05E3 || cp == 0x05E5) continue;
      out.push_back(utf8::encode(cp));
    }
    return out;
  }();
  return kLetters;
}

const std::vector<std::string> kPrefixes = {"ה", "ו", "ב", "ל", "ש"};
const std::vector<std::string> kSuffixes = {"ים", "ות", "ה", "ת", "י", "נו"};
// Stems never end in a letter that closes a suffix, so suffix stripping
// recovers them exactly.
const std::set<std::string> kNoFinal = {"ה", "ו", "י", "ת"};

MorphRuleTable default_rules() {
  MorphRuleTable rules;
  rules.prefixes = kPrefixes;
  rules.suffixes = kSuffixes;
  rules.min_stem_length = 2;
  return rules;
}

std::vector<std::string> make_words(Rng& rng, int count, int min_len, int max_len, std::set<std::string>& taken) {
  const auto& abc = letters();
  std::vector<std::string> out;
  while (static_cast<int>(out.size()) < count) {
    const int len = min_len + static_cast<int>(rng.index(static_cast<std::size_t>(max_len - min_len + 1)));
    std::string w;
    for (int i = 0; i < len; ++i) {
      std::string letter = abc[rng.index(abc.size())];
      while (i == len - 1 && kNoFinal.contains(letter)) letter = abc[rng.index(abc.size())];
      w += letter;
    }
    if (taken.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

std::string inflect(const std::string& stem, int prefix, int suffix) {
  std::string w;
  if (prefix >= 0) w += kPrefixes[static_cast<std::size_t>(prefix)];
  w += stem;
  if (suffix >= 0) w += kSuffixes[static_cast<std::size_t>(suffix)];
  return w;
}

Document make_document(std::string id, std::string text) {
  Document d;
  d.id = std::move(id);
  d.source = "synthetic";
  d.word_count = count_words(text);
  d.text = std::move(text);
  return d;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::string pos_tag(int suffix) {
  if (suffix < 0) return "ADV";
  if (suffix <= 1) return "NOUN";
  if (suffix <= 3) return "VERB";
  return "PRON";
}

}  // namespace

MrlCorpus generate_mrl_corpus(const MrlCorpusOptions& options) {
  if (options.num_stems < 1 || options.words_per_sentence < 3 || options.train_sentences < 1 ||
      options.test_sentences < 1) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic corpus sizes must be positive (three words per sentence)");
  }
  Rng rng(derive_seed(options.seed, "mrl-corpus"));
  MrlCorpus out;
  out.rules = default_rules();
  std::set<std::string> taken;
  out.stems = make_words(rng, options.num_stems, 3, 4, taken);
  std::vector<std::vector<std::size_t>> seen_by_stem(out.stems.size()), held_by_stem(out.stems.size());
  for (std::size_t s = 0; s < out.stems.size(); ++s) {
    std::vector<std::pair<int, int>> combos;
    for (int p = -1; p < static_cast<int>(kPrefixes.size()); ++p) {
      for (int x = -1; x < static_cast<int>(kSuffixes.size()); ++x) {
        if (p >= 0 || x >= 0) combos.emplace_back(p, x);
      }
    }
    rng.shuffle(combos);
    const auto held = static_cast<std::size_t>(std::llround(options.held_out_fraction * static_cast<double>(combos.size())));
    seen_by_stem[s].push_back(out.seen_forms.size());
    out.seen_forms.push_back({out.stems[s], static_cast<int>(s), -1, -1});
    for (std::size_t c = 0; c < combos.size(); ++c) {
      InflectedForm f{inflect(out.stems[s], combos[c].first, combos[c].second), static_cast<int>(s), combos[c].first,
                      combos[c].second};
      if (c < held) {
        held_by_stem[s].push_back(out.held_out_forms.size());
        out.held_out_forms.push_back(std::move(f));
      } else {
        seen_by_stem[s].push_back(out.seen_forms.size());
        out.seen_forms.push_back(std::move(f));
      }
    }
  }
  const auto sentence = [&](bool test) {
    std::vector<std::string> words;
    for (int i = 0; i < options.words_per_sentence; ++i) {
      const std::size_t s = rng.index(out.stems.size());
      const bool unseen = test && !held_by_stem[s].empty() && rng.bernoulli(options.test_unseen_rate);
      const auto& pool = unseen ? held_by_stem[s] : seen_by_stem[s];
      const auto& forms = unseen ? out.held_out_forms : out.seen_forms;
      words.push_back(forms[pool[rng.index(pool.size())]].text);
    }
    return join_words(words);
  };
  for (int i = 0; i < options.train_sentences; ++i) {
    out.train.documents.push_back(make_document(fmt::format("m{:05d}", i), sentence(false)));
  }
  for (int i = 0; i < options.test_sentences; ++i) {
    out.test.documents.push_back(make_document(fmt::format("t{:05d}", i), sentence(true)));
  }
  out.train.provenance.ingested = out.train.size();
  out.test.provenance.ingested = out.test.size();
  return out;
}

TaggingCorpus generate_tagging_corpus(const MrlCorpus& base, int train_sentences, int test_sentences,
                                      std::uint64_t seed) {
  if (base.stems.empty()) throw Error(ErrorCode::kInvalidArgument, "tagging corpus needs a stem inventory");
  Rng rng(derive_seed(seed, "tagging-corpus"));
  const int names = std::max(1, static_cast<int>(base.stems.size()) / 6);
  const auto is_name = [&](const InflectedForm& f) { return f.stem < names; };
  std::vector<std::size_t> name_seen, other_seen, name_held, other_held;
  for (std::size_t i = 0; i < base.seen_forms.size(); ++i) (is_name(base.seen_forms[i]) ? name_seen : other_seen).push_back(i);
  for (std::size_t i = 0; i < base.held_out_forms.size(); ++i) {
    (is_name(base.held_out_forms[i]) ? name_held : other_held).push_back(i);
  }
  TaggingCorpus out;
  const auto generate = [&](int count, bool test, TokenTaggingDataset& pos, TokenTaggingDataset& ner) {
    for (int n = 0; n < count; ++n) {
      TaggedSentence ps, ns;
      const int len = 5 + static_cast<int>(rng.index(4));
      bool prev_name = false;
      for (int i = 0; i < len; ++i) {
        const bool name = rng.bernoulli(prev_name ? 0.4 : 0.2);
        const bool unseen = test && rng.bernoulli(0.5);
        const auto& idx = name ? (unseen ? name_held : name_seen) : (unseen ? other_held : other_seen);
        const auto& forms = unseen ? base.held_out_forms : base.seen_forms;
        const InflectedForm& f = forms[idx[rng.index(idx.size())]];
        ps.words.push_back(f.text);
        ps.tags.push_back(pos_tag(f.suffix));
        ns.words.push_back(f.text);
        ns.tags.push_back(name ? (prev_name ? "I-PER" : "B-PER") : "O");
        prev_name = name;
      }
      pos.sentences.push_back(std::move(ps));
      ner.sentences.push_back(std::move(ns));
    }
    pos.tag_inventory = {"NOUN", "VERB", "PRON", "ADV"};
    ner.tag_inventory = {"O", "B-PER", "I-PER"};
  };
  generate(train_sentences, false, out.pos_train, out.ner_train);
  generate(test_sentences, true, out.pos_test, out.ner_test);
  return out;
}

Corpus generate_memorization_corpus(int sentences, int length, int vocabulary, std::uint64_t seed) {
  if (sentences < 1 || length < 3 || vocabulary < 2) throw Error(ErrorCode::kInvalidArgument, "bad memorization corpus sizes");
  Rng rng(derive_seed(seed, "memorization"));
  std::set<std::string> taken;
  const auto words = make_words(rng, vocabulary, 3, 5, taken);
  Corpus out;
  for (int i = 0; i < sentences; ++i) {
    std::vector<std::string> s;
    for (int j = 0; j < length; ++j) s.push_back(words[rng.index(words.size())]);
    out.documents.push_back(make_document(fmt::format("mem{:03d}", i), join_words(s)));
  }
  out.provenance.ingested = out.size();
  return out;
}

SentimentCorpus generate_sentiment_corpus(const SentimentCorpusOptions& o) {
  if (o.num_documents < 3 || o.signal_words < 1 || o.filler_words < 1 || o.min_length < 3 || o.max_length < o.min_length) {
    throw Error(ErrorCode::kInvalidArgument, "bad sentiment corpus options");
  }
  Rng rng(derive_seed(o.seed, "sentiment-corpus"));
  SentimentCorpus out;
  out.rules = default_rules();
  out.rules.prefixes.clear();
  std::set<std::string> taken;
  const auto filler = make_words(rng, o.filler_words, 3, 5, taken);
  std::array<std::vector<std::string>, kNumCategories> signal;
  for (auto& s : signal) s = make_words(rng, o.signal_words, 3, 4, taken);
  const int covered = static_cast<int>(std::ceil(o.lexicon_coverage * o.signal_words));
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    for (int w = 0; w < covered; ++w) out.lexicon.set(signal[c][static_cast<std::size_t>(w)], static_cast<Category>(c));
  }
  const auto signal_word = [&](Category c) {
    const auto& stems = signal[static_cast<std::size_t>(c)];
    const int suffix = static_cast<int>(rng.index(kSuffixes.size() + 1)) - 1;
    return inflect(stems[rng.index(stems.size())], -1, suffix);
  };
  for (int d = 0; d < o.num_documents; ++d) {
    Document doc;
    std::vector<std::string> words;
    const double u = rng.uniform();
    std::string polarity = "neutral";
    if (u < o.positive_rate) {
      polarity = "positive";
      words.push_back(signal_word(Category::kPositive));
    } else if (u < o.positive_rate + o.negative_rate) {
      polarity = "negative";
      words.push_back(signal_word(Category::kNegative));
    }
    doc.labels["polarity"] = polarity;
    for (const Sentiment s : kAllSentiments) {
      if (!is_emotion(s)) continue;
      const bool expressed = rng.bernoulli(o.emotion_rate);
      doc.labels[std::string(to_string(s))] = expressed ? "expressed" : "not_expressed";
      if (expressed) words.push_back(signal_word(category_of(s)));
    }
    const int length = o.min_length + static_cast<int>(rng.index(static_cast<std::size_t>(o.max_length - o.min_length + 1)));
    while (static_cast<int>(words.size()) < length) words.push_back(filler[rng.index(filler.size())]);
    rng.shuffle(words);
    Document made = make_document(fmt::format("c{:05d}", d), join_words(words));
    made.labels = std::move(doc.labels);
    out.corpus.documents.push_back(std::move(made));
  }
  out.corpus.provenance.ingested = out.corpus.size();
  return out;
}

std::vector<LabeledItem> generate_plutchik_pool(int comments, double missing_rate, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "plutchik"));
  const std::array<std::pair<Sentiment, Sentiment>, 4> pairs = {{{Sentiment::kJoy, Sentiment::kSadness},
                                                                 {Sentiment::kTrust, Sentiment::kDisgust},
                                                                 {Sentiment::kAnger, Sentiment::kFear},
                                                                 {Sentiment::kSurprise, Sentiment::kAnticipation}}};
  std::vector<LabeledItem> out;
  for (int c = 0; c < comments; ++c) {
    const std::string id = fmt::format("p{:05d}", c);
    const int valence = static_cast<int>(rng.index(3)) - 1;
    std::array<std::string, kNumSentiments> labels;
    labels[index_of(Sentiment::kPolarity)] = valence < 0 ? "negative" : (valence == 0 ? "neutral" : "positive");
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      // The first two pairs lean on valence; the others have their own sign.
      int sign = p < 2 ? (rng.bernoulli(0.8) ? valence : 0) : static_cast<int>(rng.index(3)) - 1;
      labels[index_of(pairs[p].first)] = sign > 0 ? "expressed" : "not_expressed";
      labels[index_of(pairs[p].second)] = sign < 0 ? "expressed" : "not_expressed";
    }
    for (const Sentiment s : kAllSentiments) {
      if (rng.bernoulli(missing_rate)) continue;
      out.push_back({id, s, labels[index_of(s)], 0});
    }
  }
  return out;
}

}  // namespace mrl
