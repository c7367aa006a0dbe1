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

#include "mrl/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include <fmt/core.h>

#include "json.hpp"
#include "mrl/utf8.hpp"

namespace mrl {

using nlohmann::json;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
    case Split::kUnassigned: return "unassigned";
  }
  return "unassigned";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "validation") return Split::kValidation;
  if (name == "test") return Split::kTest;
  if (name == "unassigned" || name.empty()) return Split::kUnassigned;
  throw Error(ErrorCode::kParseError, fmt::format("unknown split '{}'", name));
}

std::string_view to_string(Rejection rejection) {
  return rejection == Rejection::kTooShort ? "too_short" : "no_target_script";
}

const Document* Corpus::find(std::string_view id) const {
  for (const auto& doc : documents) {
    if (doc.id == id) return &doc;
  }
  return nullptr;
}

std::vector<const Document*> Corpus::in_split(Split split) const {
  std::vector<const Document*> out;
  for (const auto& doc : documents) {
    if (doc.split == split) out.push_back(&doc);
  }
  return out;
}

Corpus Corpus::from_texts(const std::vector<std::string>& texts) {
  Corpus corpus;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    Document doc;
    doc.id = fmt::format("d{}", i);
    doc.text = texts[i];
    doc.word_count = count_words(texts[i]);
    corpus.documents.push_back(std::move(doc));
  }
  corpus.provenance.ingested = texts.size();
  return corpus;
}

ScriptPredicate ScriptPredicate::parse(std::string_view spec) {
  std::vector<Range> ranges;
  for (const auto& part : split(spec, ',')) {
    const auto bounds = split(part, '-');
    if (bounds.size() != 2) throw Error(ErrorCode::kParseError, "bad script range '" + part + "'");
    try {
      ranges.emplace_back(static_cast<char32_t>(std::stoul(bounds[0], nullptr, 16)),
                          static_cast<char32_t>(std::stoul(bounds[1], nullptr, 16)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParseError, "bad script range '" + part + "'");
    }
  }
  return ScriptPredicate(std::move(ranges));
}

bool ScriptPredicate::in_range(char32_t cp) const {
  return std::any_of(ranges_.begin(), ranges_.end(),
                     [cp](const Range& r) { return cp >= r.first && cp <= r.second; });
}

bool ScriptPredicate::operator()(std::string_view text) const {
  for (auto word : utf8::split_words(text)) {
    const std::u32string cps = utf8::decode(word);
    const auto hits = std::count_if(cps.begin(), cps.end(), [this](char32_t cp) { return in_range(cp); });
    if (2 * static_cast<std::size_t>(hits) > cps.size()) return true;
  }
  return false;
}

std::size_t count_words(std::string_view text) {
  const auto words = utf8::split_words(text);
  return static_cast<std::size_t>(std::count_if(words.begin(), words.end(), utf8::is_word));
}

namespace {

bool is_link(std::string_view token) {
  std::string head(token.substr(0, 8));
  std::transform(head.begin(), head.end(), head.begin(), [](unsigned char c) { return std::tolower(c); });
  return head.starts_with("http://") || head.starts_with("https://") || head.starts_with("www.");
}

std::string drop_links(std::string_view text) {
  std::string out;
  for (auto token : utf8::split_words(text)) {
    if (is_link(token)) continue;
    if (!out.empty()) out += ' ';
    out += token;
  }
  return out;
}

std::string collapse_runs(std::string_view text) {
  const std::u32string cps = utf8::decode(text);
  std::u32string out;
  std::size_t i = 0;
  while (i < cps.size()) {
    std::size_t j = i;
    while (j < cps.size() && cps[j] == cps[i]) ++j;
    const std::size_t run = j - i;
    out.append(run >= 3 ? 1 : run, cps[i]);
    i = j;
  }
  return utf8::encode(out);
}

std::string normalize_space(std::string_view text) {
  std::string out;
  for (auto token : utf8::split_words(text)) {
    if (!out.empty()) out += ' ';
    out += token;
  }
  return out;
}

}  // namespace

CleanOutcome clean_comment(std::string_view raw, const CleanOptions& options) {
  std::string text(raw);
  // Each rule can expose work for another (collapsing "htttp://" makes a link),
  // so iterate to a fixed point.
  for (int pass = 0; pass < 8; ++pass) {
    std::string next = normalize_space(collapse_runs(drop_links(text)));
    if (next == text) break;
    text = std::move(next);
  }
  CleanOutcome outcome;
  outcome.word_count = count_words(text);
  outcome.text = std::move(text);
  if (outcome.word_count < options.min_words) {
    outcome.rejection = Rejection::kTooShort;
  } else if (!options.script(outcome.text)) {
    outcome.rejection = Rejection::kNoTargetScript;
  }
  return outcome;
}

CleanOutcome clean_comment(std::string_view raw, const ScriptPredicate& script) {
  CleanOptions options;
  options.script = script;
  return clean_comment(raw, options);
}

Corpus dedup_corpus(const Corpus& corpus) {
  Corpus out;
  out.provenance = corpus.provenance;
  std::unordered_set<std::string> seen;
  for (const auto& doc : corpus.documents) {
    if (seen.insert(doc.text).second) {
      out.documents.push_back(doc);
    } else {
      ++out.provenance.deduplicated;
    }
  }
  return out;
}

Corpus ingest(const std::vector<Document>& raw, const CleanOptions& options) {
  Corpus corpus;
  std::unordered_set<std::string> ids;
  for (const auto& doc : raw) {
    if (!ids.insert(doc.id).second) {
      throw Error(ErrorCode::kParseError, fmt::format("duplicate document id '{}'", doc.id));
    }
    ++corpus.provenance.ingested;
    CleanOutcome outcome = clean_comment(doc.text, options);
    if (!outcome.accepted()) {
      if (*outcome.rejection == Rejection::kTooShort) {
        ++corpus.provenance.rejected_short;
      } else {
        ++corpus.provenance.rejected_nonhebrew;
      }
      continue;
    }
    Document cleaned = doc;
    cleaned.text = std::move(outcome.text);
    cleaned.word_count = outcome.word_count;
    cleaned.split = Split::kUnassigned;
    corpus.documents.push_back(std::move(cleaned));
  }
  return dedup_corpus(corpus);
}

Corpus split_dataset(const Corpus& corpus, const SplitFractions& fractions, std::uint64_t seed) {
  const double total = fractions.train + fractions.validation + fractions.test;
  if (std::abs(total - 1.0) > 1e-9 || fractions.train < 0 || fractions.validation < 0 || fractions.test < 0) {
    throw Error(ErrorCode::kInvalidArgument, "split fractions must be non-negative and sum to 1");
  }
  const std::size_t n = corpus.size();
  if (n < 3) throw Error(ErrorCode::kInsufficientData, fmt::format("cannot split {} documents", n));

  std::vector<std::pair<std::uint64_t, std::size_t>> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i) order.emplace_back(stable_hash(corpus.documents[i].id, seed), i);
  std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return corpus.documents[a.second].id < corpus.documents[b.second].id;
  });

  const auto rounded = [n](double f) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(f * static_cast<double>(n))));
  };
  const std::size_t n_val = rounded(fractions.validation);
  const std::size_t n_test = rounded(fractions.test);
  if (n_val + n_test >= n) throw Error(ErrorCode::kInsufficientData, "no documents left for training");

  Corpus out = corpus;
  for (std::size_t rank = 0; rank < n; ++rank) {
    Split split = Split::kTrain;
    if (rank < n_val) {
      split = Split::kValidation;
    } else if (rank < n_val + n_test) {
      split = Split::kTest;
    }
    out.documents[order[rank].second].split = split;
  }
  return out;
}

Corpus split_dataset(const Corpus& corpus, std::uint64_t seed) { return split_dataset(corpus, SplitFractions{}, seed); }

namespace {

std::string string_field(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (it->is_string()) return it->get<std::string>();
  return it->dump();
}

}  // namespace

std::vector<Document> parse_documents_jsonl(std::string_view contents) {
  std::vector<Document> docs;
  std::size_t line_no = 0;
  for (const auto& line : split(contents, '\n')) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, fmt::format("line {}: {}", line_no, e.what()));
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("text")) {
      throw Error(ErrorCode::kParseError, fmt::format("line {}: expected object with id and text", line_no));
    }
    Document doc;
    doc.id = string_field(obj, "id");
    doc.source = string_field(obj, "source");
    doc.section = string_field(obj, "section");
    doc.title = string_field(obj, "title");
    doc.text = string_field(obj, "text");
    doc.date = string_field(obj, "date");
    doc.word_count = obj.value("word_count", count_words(doc.text));
    if (obj.contains("split")) doc.split = parse_split(string_field(obj, "split"));
    if (obj.contains("labels") && obj["labels"].is_object()) {
      for (const auto& [name, value] : obj["labels"].items()) {
        doc.labels[name] = value.is_string() ? value.get<std::string>() : value.dump();
      }
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> read_documents_jsonl(const std::string& path) { return parse_documents_jsonl(read_file(path)); }

Corpus read_corpus_jsonl(const std::string& path) {
  Corpus corpus;
  corpus.documents = read_documents_jsonl(path);
  corpus.provenance.ingested = corpus.documents.size();
  return corpus;
}

std::string corpus_to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& doc : corpus.documents) {
    json obj = {{"id", doc.id},          {"source", doc.source}, {"section", doc.section},
                {"title", doc.title},    {"text", doc.text},     {"date", doc.date},
                {"word_count", doc.word_count}, {"split", std::string(to_string(doc.split))}};
    if (!doc.labels.empty()) obj["labels"] = doc.labels;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::string provenance_to_json(const Provenance& p) {
  const json obj = {{"ingested", p.ingested},
                    {"rejected_short", p.rejected_short},
                    {"rejected_nonhebrew", p.rejected_nonhebrew},
                    {"deduplicated", p.deduplicated}};
  return obj.dump(2);
}

}  // namespace mrl
