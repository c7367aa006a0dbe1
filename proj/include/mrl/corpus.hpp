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

#ifndef MRL_CORPUS_HPP_
#define MRL_CORPUS_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mrl/common.hpp"

namespace mrl {

enum class Split { kUnassigned, kTrain, kValidation, kTest };

std::string_view to_string(Split split);
Split parse_split(std::string_view name);

struct Document {
  std::string id;
  std::string source;
  std::string section;
  std::string title;
  std::string text;
  std::string date;
  std::size_t word_count = 0;
  std::map<std::string, std::string> labels;  // sentiment name -> label
  Split split = Split::kUnassigned;
};

struct Provenance {
  std::size_t ingested = 0;
  std::size_t rejected_short = 0;
  std::size_t rejected_nonhebrew = 0;
  std::size_t deduplicated = 0;
};

struct Corpus {
  std::vector<Document> documents;
  Provenance provenance;

  std::size_t size() const { return documents.size(); }
  bool empty() const { return documents.empty(); }
  const Document* find(std::string_view id) const;
  // Documents assigned to one split, in corpus order.
  std::vector<const Document*> in_split(Split split) const;
  // Convenience for tests and synthetic data: wraps plain texts with ids "d0", "d1", ...
  static Corpus from_texts(const std::vector<std::string>& texts);
};

// Accepts text containing at least one word whose code points lie mostly
// inside the configured ranges.
class ScriptPredicate {
 public:
  using Range = std::pair<char32_t, char32_t>;

  ScriptPredicate() : ScriptPredicate(hebrew()) {}
  explicit ScriptPredicate(std::vector<Range> ranges) : ranges_(std::move(ranges)) {}

  static ScriptPredicate hebrew() { return ScriptPredicate({{0x0590, 0x05FF}, {0xFB1D, 0xFB4F}}); }
  static ScriptPredicate latin() { return ScriptPredicate({{U'A', U'Z'}, {U'a', U'z'}, {0x00C0, 0x024F}}); }
  // Parses "0590-05FF,FB1D-FB4F" (hex code points).
  static ScriptPredicate parse(std::string_view spec);

  bool in_range(char32_t cp) const;
  bool operator()(std::string_view text) const;
  const std::vector<Range>& ranges() const { return ranges_; }

 private:
  std::vector<Range> ranges_;
};

enum class Rejection { kTooShort, kNoTargetScript };
std::string_view to_string(Rejection rejection);

struct CleanOptions {
  std::size_t min_words = 3;
  ScriptPredicate script;
};

struct CleanOutcome {
  std::string text;
  std::size_t word_count = 0;
  std::optional<Rejection> rejection;

  bool accepted() const { return !rejection.has_value(); }
};

// Counts whitespace-delimited runs that are not punctuation-only.
std::size_t count_words(std::string_view text);

// Removes links, collapses runs of three or more identical code points to a
// single one and normalizes whitespace; then applies the length and script
// admission rules.
CleanOutcome clean_comment(std::string_view raw, const CleanOptions& options = {});
CleanOutcome clean_comment(std::string_view raw, const ScriptPredicate& script);

// Keeps the first occurrence of each distinct text, preserving order.
Corpus dedup_corpus(const Corpus& corpus);

// Cleans every raw document, drops rejections and duplicates, and fills in
// provenance. Raw document ids must be unique.
Corpus ingest(const std::vector<Document>& raw, const CleanOptions& options = {});

struct SplitFractions {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
};

// Orders documents by a seeded hash of their ids and cuts by fractions. The
// validation and test sizes are the rounded fractions (at least one each);
// train takes the remainder.
Corpus split_dataset(const Corpus& corpus, const SplitFractions& fractions, std::uint64_t seed);
Corpus split_dataset(const Corpus& corpus, std::uint64_t seed);

// JSONL ingestion and emission.
std::vector<Document> read_documents_jsonl(const std::string& path);
std::vector<Document> parse_documents_jsonl(std::string_view contents);
std::string corpus_to_jsonl(const Corpus& corpus);
std::string provenance_to_json(const Provenance& provenance);
Corpus read_corpus_jsonl(const std::string& path);

}  // namespace mrl

#endif  // MRL_CORPUS_HPP_
