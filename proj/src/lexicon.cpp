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

#include "mrl/lexicon.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "mrl/common.hpp"
#include "mrl/utf8.hpp"

namespace mrl {

const CategoryFlags* SentimentLexicon::find(std::string_view term) const {
  const auto it = entries.find(term);
  return it == entries.end() ? nullptr : &it->second;
}

void SentimentLexicon::set(std::string term, Category c, bool flag) {
  auto& flags = entries[std::move(term)];
  flags.set(static_cast<std::size_t>(c), flag);
}

SentimentLexicon parse_lexicon(std::string_view contents) {
  SentimentLexicon lex;
  std::map<std::pair<std::string, std::size_t>, bool> seen;
  std::vector<std::size_t> bad;
  std::size_t line_no = 0;
  for (std::string line : split(contents, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto f = split(line, '\t');
    const auto cat = f.size() == 3 ? parse_category(f[1]) : std::nullopt;
    if (f.size() != 3 || f[0].empty() || !cat || (f[2] != "0" && f[2] != "1")) {
      bad.push_back(line_no);
      continue;
    }
    const auto key = std::make_pair(f[0], static_cast<std::size_t>(*cat));
    if (seen.contains(key)) ++lex.duplicate_warnings;
    seen[key] = f[2] == "1";
  }
  if (!bad.empty()) {
    throw Error(ErrorCode::kParseError, fmt::format("malformed lexicon rows at lines {}", fmt::join(bad, ", ")));
  }
  for (const auto& [key, flag] : seen) {
    if (flag) lex.entries[key.first].set(key.second);
  }
  return lex;
}

SentimentLexicon load_lexicon(const std::string& path) { return parse_lexicon(read_file(path)); }

std::string lexicon_to_tsv(const SentimentLexicon& lexicon) {
  std::string out;
  for (const auto& [term, flags] : lexicon.entries) {
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      if (flags.test(c)) out += fmt::format("{}\t{}\t1\n", term, to_string(static_cast<Category>(c)));
    }
  }
  return out;
}

RuleLemmatizer::RuleLemmatizer(MorphRuleTable rules) : rules_(std::move(rules)) {
  rules_.validate();
  std::sort(rules_.suffixes.begin(), rules_.suffixes.end(), [](const std::string& a, const std::string& b) {
    const auto la = utf8::length(a), lb = utf8::length(b);
    return la != lb ? la > lb : a < b;
  });
}

std::string RuleLemmatizer::lemmatize(std::string_view token) const {
  std::string word(token);
  bool changed = true;
  while (changed) {
    changed = false;
    const std::size_t len = utf8::length(word);
    for (const auto& s : rules_.suffixes) {
      if (s.empty() || !word.ends_with(s)) continue;
      if (len - utf8::length(s) < rules_.min_stem_length) continue;
      word.resize(word.size() - s.size());
      changed = true;
      break;
    }
  }
  return word;
}

double SentimentScores::value(Sentiment s) const {
  return is_emotion(s) ? (*this)[category_of(s)] : polarity();
}

std::vector<std::string> lexicon_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const auto w : utf8::split_words(text)) {
    const auto t = utf8::trim_punctuation(w);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

SentimentScores score_text(std::string_view text, const SentimentLexicon& lexicon, const Lemmatizer& lemmatizer) {
  const auto tokens = lexicon_tokens(text);
  if (tokens.empty()) throw Error(ErrorCode::kEmptyInput, "cannot score a document without tokens");
  SentimentScores out;
  out.token_count = tokens.size();
  std::array<std::size_t, kNumCategories> counts{};
  for (const auto& t : tokens) {
    const CategoryFlags* flags = lexicon.find(lemmatizer.lemmatize(t));
    if (flags == nullptr) continue;
    for (std::size_t c = 0; c < kNumCategories; ++c) counts[c] += flags->test(c) ? 1 : 0;
  }
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    out.scores[c] = static_cast<double>(counts[c]) / static_cast<double>(out.token_count);
  }
  return out;
}

SentimentScores score_document(const Document& doc, const SentimentLexicon& lexicon, const Lemmatizer& lemmatizer) {
  try {
    return score_text(doc.text, lexicon, lemmatizer);
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("document '{}': {}", doc.id, e.what()));
  }
}

std::string scores_to_csv(const std::vector<std::pair<std::string, SentimentScores>>& scores) {
  std::string out = "document_id";
  for (std::size_t c = 0; c < kNumCategories; ++c) out += fmt::format(",{}", to_string(static_cast<Category>(c)));
  out += ",polarity,token_count\n";
  for (const auto& [id, s] : scores) {
    out += id;
    for (const double v : s.scores) out += fmt::format(",{:.9g}", v);
    out += fmt::format(",{:.9g},{}\n", s.polarity(), s.token_count);
  }
  return out;
}

}  // namespace mrl
