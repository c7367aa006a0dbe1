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

#include "doctest.h"
#include "mrl/common.hpp"
#include "mrl/corpus.hpp"
#include "mrl/lexicon.hpp"
#include "mrl/random.hpp"
#include "mrl/tokenizers.hpp"

using namespace mrl;

TEST_CASE("lexicon parsing: last row wins and empty terms drop") {
  const auto lex = parse_lexicon(
      "# term\tcategory\tflag\n"
      "טוב\tpositive\t1\n"
      "טוב\tjoy\t1\n"
      "רע\tnegative\t1\n"
      "רע\tnegative\t0\n"
      "כעס\tanger\t1\n"
      "כעס\tanger\t1\n");
  CHECK(lex.size() == 2);
  CHECK(lex.duplicate_warnings == 2);
  REQUIRE(lex.find("טוב") != nullptr);
  CHECK(lex.find("טוב")->test(static_cast<std::size_t>(Category::kJoy)));
  CHECK(lex.find("רע") == nullptr);
  CHECK(parse_lexicon(lexicon_to_tsv(lex)).entries == lex.entries);
}

TEST_CASE("malformed lexicon rows are all reported") {
  try {
    parse_lexicon("a\tjoy\t1\nb\tbliss\t1\nc\tjoy\nd\tjoy\t2\n");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParseError);
    CHECK(std::string(e.what()).find("2, 3, 4") != std::string::npos);
  }
}

TEST_CASE("rule lemmatizer strips the longest suffix down to a fixpoint") {
  MorphRuleTable rules;
  rules.suffixes = {"ה", "ים", "ות"};
  const RuleLemmatizer lem(rules);
  CHECK(lem.lemmatize("ספרים") == "ספר");
  CHECK(lem.lemmatize("מורות") == "מור");
  // ים is stripped first, then ה.
  CHECK(lem.lemmatize("שמחהים") == "שמח");
  CHECK(lem.lemmatize("ים") == "ים");
  CHECK(lem.lemmatize("בים") == "בים");
  CHECK(IdentityLemmatizer().lemmatize("ספרים") == "ספרים");
}

TEST_CASE("lemmatization is idempotent") {
  MorphRuleTable rules;
  rules.suffixes = {"ה", "ים", "ות", "ת", "י", "נו"};
  const RuleLemmatizer lem(rules);
  const std::vector<std::string> letters{"א", "ב", "ה", "ו", "י", "ם", "ת", "נ", "ש"};
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    std::string w;
    const int n = 1 + static_cast<int>(rng.index(7));
    for (int j = 0; j < n; ++j) w += letters[rng.index(letters.size())];
    const std::string once = lem.lemmatize(w);
    CHECK(lem.lemmatize(once) == once);
    CHECK(w.starts_with(once));
  }
}

TEST_CASE("scores are shares of lemmatized tokens per category") {
  SentimentLexicon lex;
  lex.set("שמח", Category::kJoy);
  lex.set("שמח", Category::kPositive);
  lex.set("עצוב", Category::kSadness);
  lex.set("עצוב", Category::kNegative);
  MorphRuleTable rules;
  rules.suffixes = {"ים"};
  const RuleLemmatizer lem(rules);
  const auto s = score_text("שמחים, מאוד שמח! עצוב היום", lex, lem);
  CHECK(s.token_count == 5);
  CHECK(s[Category::kJoy] == doctest::Approx(2.0 / 5.0));
  CHECK(s[Category::kSadness] == doctest::Approx(1.0 / 5.0));
  CHECK(s.polarity() == doctest::Approx(1.0 / 5.0));
  CHECK(s.value(Sentiment::kJoy) == s[Category::kJoy]);
  CHECK(s.value(Sentiment::kPolarity) == s.polarity());
  // Without lemmatization the inflected form misses.
  CHECK(score_text("שמחים", lex, IdentityLemmatizer())[Category::kJoy] == 0.0);
  try {
    score_text(" !! ... ", lex, lem);
    FAIL("expected empty input");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyInput);
  }
}

TEST_CASE("score csv has one row per document") {
  SentimentLexicon lex;
  lex.set("טוב", Category::kPositive);
  const Corpus c = Corpus::from_texts({"טוב מאוד", "רע"});
  std::vector<std::pair<std::string, SentimentScores>> rows;
  for (const auto& d : c.documents) rows.emplace_back(d.id, score_document(d, lex, IdentityLemmatizer()));
  const auto csv = scores_to_csv(rows);
  const auto lines = split(csv, '\n');
  CHECK(lines[0] ==
        "document_id,anger,disgust,anticipation,fear,joy,sadness,surprise,trust,positive,negative,polarity,token_count");
  CHECK(lines[1].starts_with("d0,"));
  CHECK(lines.size() == 4);
}
