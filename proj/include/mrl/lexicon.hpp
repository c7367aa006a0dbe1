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

#ifndef MRL_LEXICON_HPP_
#define MRL_LEXICON_HPP_

#include <array>
#include <bitset>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mrl/corpus.hpp"
#include "mrl/sentiment.hpp"
#include "mrl/tokenizers.hpp"

namespace mrl {

using CategoryFlags = std::bitset<kNumCategories>;

struct SentimentLexicon {
  std::map<std::string, CategoryFlags, std::less<>> entries;
  std::size_t duplicate_warnings = 0;

  const CategoryFlags* find(std::string_view term) const;
  void set(std::string term, Category c, bool flag = true);
  std::size_t size() const { return entries.size(); }
};

// TSV rows "term<TAB>category<TAB>flag" with flag 0 or 1. A repeated
// (term, category) row overrides the earlier one and counts a warning; terms
// left without any flag are dropped. Malformed rows raise a parse error
// naming every bad line.
SentimentLexicon parse_lexicon(std::string_view contents);
SentimentLexicon load_lexicon(const std::string& path);
std::string lexicon_to_tsv(const SentimentLexicon& lexicon);

class Lemmatizer {
 public:
  virtual ~Lemmatizer() = default;
  virtual std::string lemmatize(std::string_view token) const = 0;
};

class IdentityLemmatizer : public Lemmatizer {
 public:
  std::string lemmatize(std::string_view token) const override { return std::string(token); }
};

// Strips the longest matching suffix while the remaining stem keeps at least
// min_stem_length characters, repeating until nothing more applies.
class RuleLemmatizer : public Lemmatizer {
 public:
  explicit RuleLemmatizer(MorphRuleTable rules);
  std::string lemmatize(std::string_view token) const override;

 private:
  MorphRuleTable rules_;
};

struct SentimentScores {
  std::array<double, kNumCategories> scores{};
  std::size_t token_count = 0;

  double operator[](Category c) const { return scores[static_cast<std::size_t>(c)]; }
  double polarity() const { return (*this)[Category::kPositive] - (*this)[Category::kNegative]; }
  // Emotions read their category; polarity reads positive - negative.
  double value(Sentiment s) const;
};

// Word tokens with surrounding punctuation removed; empty tokens are skipped.
std::vector<std::string> lexicon_tokens(std::string_view text);

// Per category: share of lemmatized tokens whose entry carries that flag.
SentimentScores score_text(std::string_view text, const SentimentLexicon& lexicon, const Lemmatizer& lemmatizer);
SentimentScores score_document(const Document& doc, const SentimentLexicon& lexicon, const Lemmatizer& lemmatizer);

// CSV "document_id,anger,...,negative,polarity,token_count".
std::string scores_to_csv(const std::vector<std::pair<std::string, SentimentScores>>& scores);

}  // namespace mrl

#endif  // MRL_LEXICON_HPP_
