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

#include <algorithm>
#include <map>

#include "doctest.h"
#include "mrl/common.hpp"
#include "mrl/corpus.hpp"
#include "mrl/synthetic.hpp"
#include "mrl/tokenizers.hpp"
#include "mrl/utf8.hpp"

using namespace mrl;

namespace {

Corpus mrl_train(std::uint64_t seed = 3) {
  MrlCorpusOptions o;
  o.num_stems = 20;
  o.train_sentences = 120;
  o.test_sentences = 30;
  o.seed = seed;
  return generate_mrl_corpus(o).train;
}

MorphRuleTable hebrew_rules() {
  MorphRuleTable r;
  r.prefixes = {"ה", "ו", "ב"};
  r.suffixes = {"ים", "ות", "ה"};
  return r;
}

std::vector<std::string> corpus_words(const Corpus& c) {
  std::vector<std::string> out;
  for (const auto& d : c.documents) {
    for (auto w : utf8::split_words(d.text)) out.emplace_back(w);
  }
  return out;
}

}  // namespace

TEST_CASE("special tokens take the first ids") {
  const Vocabulary v = train_char_vocab(Corpus::from_texts({"אב גד"}));
  CHECK(v.token(kPadId) == "[PAD]");
  CHECK(v.token(kUnkId) == "[UNK]");
  CHECK(v.token(kClsId) == "[CLS]");
  CHECK(v.token(kSepId) == "[SEP]");
  CHECK(v.token(kMaskId) == "[MASK]");
  CHECK(v.size() == kNumSpecialTokens + 4);
}

TEST_CASE("positional chars decode back to the text") {
  const Corpus c = Corpus::from_texts({"שלום עולם", "עוד טקסט"});
  const Vocabulary v = train_char_vocab(c, true);
  const auto ids = encode("שלום טקסט", v);
  CHECK(std::find(ids.begin(), ids.end(), kUnkId) == ids.end());
  CHECK(decode(ids, v) == "שלום טקסט");
}

TEST_CASE("plain chars cover characters but not word boundaries") {
  const Vocabulary v = train_char_vocab(Corpus::from_texts({"אב גד"}));
  CHECK(decode(encode("אב גד", v), v) == "אבגד");
  CHECK(encode("ז", v) == std::vector<int>{kUnkId});
}

TEST_CASE("subword training honours the target and covers training words") {
  const Corpus c = mrl_train();
  const Vocabulary v = train_subword_vocab(c, 120);
  CHECK(v.size() <= 120);
  CHECK((v.size() == 120 || v.truncated()));
  for (const auto& w : corpus_words(c)) {
    const auto ids = encode_word(w, v);
    CHECK(std::find(ids.begin(), ids.end(), kUnkId) == ids.end());
    CHECK(decode(ids, v) == w);
  }
  CHECK(vocabulary_to_text(train_subword_vocab(c, 120)) == vocabulary_to_text(v));
  CHECK_THROWS_AS(train_subword_vocab(c, 10), Error);
}

TEST_CASE("larger subword targets never lengthen encodings") {
  const Corpus c = mrl_train();
  const Vocabulary small = train_subword_vocab(c, 80);
  const Vocabulary large = train_subword_vocab(c, 200);
  std::size_t n_small = 0, n_large = 0;
  for (const auto& d : c.documents) {
    n_small += encode(d.text, small).size();
    n_large += encode(d.text, large).size();
  }
  CHECK(n_large <= n_small);
}

TEST_CASE("word vocabulary trims by interpolated frequency quantile") {
  // Frequencies a:10 b:3 c:2 d:1 e:1; sorted 1 1 2 3 10.
  const Corpus c = Corpus::from_texts({"a a a a a a a a a a", "b b b c c d e"});
  // q = 0.25: position 1 -> threshold 1, keeps counts above 1.
  CHECK(train_word_vocab(c, 0.25).size() == kNumSpecialTokens + 3);
  // q = 0.6: position 2.4 -> 2 + 0.4 * (3 - 2) = 2.4, keeps a and b.
  CHECK(train_word_vocab(c, 0.6).size() == kNumSpecialTokens + 2);
  CHECK(train_word_vocab(c, 0.0).size() == kNumSpecialTokens + 5);
  const Vocabulary v = train_word_vocab(c, 0.6);
  CHECK(v.token(kNumSpecialTokens) == "a");
  CHECK(encode("a z", v) == std::vector<int>{kNumSpecialTokens, kUnkId});
  CHECK_THROWS_AS(train_word_vocab(c, 1.0), Error);
}

TEST_CASE("morpheme segmentation strips one prefix and one suffix") {
  const auto r = hebrew_rules();
  CHECK(morpheme_segment("הספרים", r) == std::vector<std::string>{"ה##", "ספר", "##ים"});
  CHECK(morpheme_segment("ספרות", r) == std::vector<std::string>{"ספר", "##ות"});
  CHECK(morpheme_segment("הם", r) == std::vector<std::string>{"הם"});
  // The stem must keep min_stem_length characters, so the suffix stays.
  CHECK(morpheme_segment("בים", r) == std::vector<std::string>{"ב##", "ים"});
  CHECK(morpheme_segment("ספרים", MorphRuleTable{{}, {"ים"}, 4}) == std::vector<std::string>{"ספרים"});
}

TEST_CASE("morpheme vocabulary round trips training words") {
  MrlCorpusOptions o;
  o.num_stems = 20;
  o.train_sentences = 120;
  o.seed = 5;
  const MrlCorpus m = generate_mrl_corpus(o);
  const Vocabulary v = train_morpheme_vocab(m.train, m.rules, 150);
  for (const auto& w : corpus_words(m.train)) {
    const auto ids = encode_word(w, v);
    CHECK(std::find(ids.begin(), ids.end(), kUnkId) == ids.end());
    CHECK(decode(ids, v) == w);
  }
  for (const auto& w : corpus_words(m.test)) CHECK(decode(encode_word(w, v), v) == w);
}

TEST_CASE("oov rate counts word tokens") {
  const Corpus train = Corpus::from_texts({"אב גד אב"});
  const Corpus test = Corpus::from_texts({"אב דג זה"});
  CHECK(oov_rate(train_word_vocab(train, 0.0), test) == doctest::Approx(2.0 / 3.0));
  // ז and ה are unseen characters.
  CHECK(oov_rate(train_char_vocab(train), test) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(oov_rate(train_char_vocab(train), Corpus{}), Error);
}

TEST_CASE("vocabulary files round trip") {
  const MrlCorpus m = generate_mrl_corpus(MrlCorpusOptions{.num_stems = 10, .train_sentences = 40, .seed = 2});
  for (const Vocabulary& v : {train_char_vocab(m.train, true), train_subword_vocab(m.train, 80),
                              train_morpheme_vocab(m.train, m.rules, 60), train_word_vocab(m.train, 0.05)}) {
    const Vocabulary back = vocabulary_from_text(vocabulary_to_text(v));
    CHECK(back.tokens() == v.tokens());
    CHECK(back.scheme() == v.scheme());
    CHECK(back.positional_chars() == v.positional_chars());
    CHECK(back.rules().suffixes == v.rules().suffixes);
    CHECK(vocabulary_to_text(back) == vocabulary_to_text(v));
  }
  CHECK_THROWS_AS(vocabulary_from_text("# scheme=word\n[UNK]\n[PAD]\n[CLS]\n[SEP]\n[MASK]\n"), Error);
  CHECK_THROWS_AS(vocabulary_from_text("[PAD]\n"), Error);
}

TEST_CASE("rule tables parse comments and round trip") {
  const auto r = parse_rule_table("# comment\nprefix\tה\nsuffix\tים\nmin_stem_length\t3\n");
  CHECK(r.prefixes == std::vector<std::string>{"ה"});
  CHECK(r.suffixes == std::vector<std::string>{"ים"});
  CHECK(r.min_stem_length == 3);
  const auto back = parse_rule_table(rule_table_to_text(r));
  CHECK(back.prefixes == r.prefixes);
  CHECK(back.min_stem_length == 3);
  CHECK_THROWS_AS(parse_rule_table("infix\tx\n"), Error);
}

TEST_CASE("merged rule tables keep every affix once") {
  const auto a = parse_rule_table("prefix\tה\nsuffix\tים\n");
  const auto b = parse_rule_table("prefix\tו\nsuffix\tים\nsuffix\tות\nmin_stem_length\t3\n");
  const auto m = merge_rule_tables(a, b);
  CHECK(m.prefixes == std::vector<std::string>{"ה", "ו"});
  CHECK(m.suffixes == std::vector<std::string>{"ים", "ות"});
  CHECK(m.min_stem_length == 3);
  CHECK(merge_rule_tables(m, m).prefixes == m.prefixes);
}

TEST_CASE("word starts index the first piece of each word") {
  const Vocabulary v = train_char_vocab(Corpus::from_texts({"אב גדה"}), true);
  const std::vector<std::string> words{"אב", "גדה"};
  const auto pieces = encode_words(words, v);
  CHECK(pieces.word_starts == std::vector<std::size_t>{0, 2});
  CHECK(pieces.ids.size() == 5);
}

TEST_CASE("scheme names parse") {
  CHECK(parse_scheme("char") == Scheme::kChar);
  CHECK(parse_scheme("subword") == Scheme::kSubwordNgram);
  CHECK(parse_scheme("morpheme") == Scheme::kSubwordMorpheme);
  CHECK(parse_scheme("word") == Scheme::kWord);
  CHECK_THROWS_AS(parse_scheme("bytes"), Error);
}
