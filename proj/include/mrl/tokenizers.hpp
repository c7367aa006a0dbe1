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

#ifndef MRL_TOKENIZERS_HPP_
#define MRL_TOKENIZERS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mrl/corpus.hpp"

namespace mrl {

enum class Scheme { kChar, kSubwordNgram, kSubwordMorpheme, kWord };

std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view name);

// Special tokens occupy the first ids of every vocabulary.
inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kClsId = 2;
inline constexpr int kSepId = 3;
inline constexpr int kMaskId = 4;
inline constexpr int kNumSpecialTokens = 5;
inline constexpr std::string_view kContinuationMarker = "##";

bool is_special_id(int id);

// Stand-in for an external morphological analyzer: at most one prefix and one
// suffix, longest match first.
struct MorphRuleTable {
  std::vector<std::string> prefixes;
  std::vector<std::string> suffixes;
  std::size_t min_stem_length = 2;

  void validate() const;
  bool empty() const { return prefixes.empty() && suffixes.empty(); }
};

// TSV rows "prefix<TAB>affix" or "suffix<TAB>affix"; '#' starts a comment.
MorphRuleTable parse_rule_table(std::string_view contents);
MorphRuleTable load_rule_table(const std::string& path);
std::string rule_table_to_text(const MorphRuleTable& rules);
// Union of affixes, first table's order first; the larger minimum stem length.
MorphRuleTable merge_rule_tables(const MorphRuleTable& a, const MorphRuleTable& b);

class Vocabulary {
 public:
  Vocabulary() = default;
  // `tokens` excludes the special tokens, which are prepended.
  Vocabulary(Scheme scheme, std::vector<std::string> tokens);

  Scheme scheme() const { return scheme_; }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::optional<int> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }
  // A character is covered when its word-initial or continuation form exists.
  bool covers_char(std::string_view ch) const;

  // Set when training stopped before reaching the requested size.
  bool truncated() const { return truncated_; }
  // Char scheme only: non-initial characters carry the continuation marker.
  bool positional_chars() const { return positional_chars_; }
  const MorphRuleTable& rules() const { return rules_; }
  const std::string& corpus_digest() const { return corpus_digest_; }

  void set_truncated(bool value) { truncated_ = value; }
  void set_positional_chars(bool value) { positional_chars_ = value; }
  void set_rules(MorphRuleTable rules) { rules_ = std::move(rules); }
  void set_corpus_digest(std::string digest) { corpus_digest_ = std::move(digest); }

 private:
  Scheme scheme_ = Scheme::kChar;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> token_to_id_;
  bool truncated_ = false;
  bool positional_chars_ = false;
  MorphRuleTable rules_;
  std::string corpus_digest_;
};

std::string corpus_digest(const Corpus& corpus);

Vocabulary train_char_vocab(const Corpus& corpus, bool positional_chars = false);

// WordPiece-style induction: starts from the character alphabet (word-initial
// and continuation forms) and repeatedly adds the adjacent-pair merge with the
// best count(ab) / (count(a) * count(b)).
Vocabulary train_subword_vocab(const Corpus& corpus, int target_size, int min_pair_frequency = 2);

// Keeps words whose frequency strictly exceeds the `trim_quantile` quantile of
// the type-frequency distribution (linear interpolation). A zero quantile keeps
// every word.
Vocabulary train_word_vocab(const Corpus& corpus, double trim_quantile = 0.05);

std::vector<std::string> morpheme_segment(std::string_view word, const MorphRuleTable& rules);

Vocabulary train_morpheme_vocab(const Corpus& corpus, const MorphRuleTable& rules, int target_size);

std::vector<int> encode_word(std::string_view word, const Vocabulary& vocab);
std::vector<int> encode(std::string_view text, const Vocabulary& vocab);

struct WordPieces {
  std::vector<int> ids;
  std::vector<std::size_t> word_starts;  // index into ids of each word's first piece
};
WordPieces encode_words(std::span<const std::string> words, const Vocabulary& vocab);

std::string decode(std::span<const int> ids, const Vocabulary& vocab);

// Word scheme: share of word tokens mapped to unk. Other schemes: share of
// words containing a character the vocabulary cannot represent.
double oov_rate(const Vocabulary& vocab, const Corpus& test);

std::string vocabulary_to_text(const Vocabulary& vocab);
Vocabulary vocabulary_from_text(std::string_view contents);
void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);

}  // namespace mrl

#endif  // MRL_TOKENIZERS_HPP_
