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

#include "mrl/tokenizers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/core.h>

#include "mrl/utf8.hpp"

namespace mrl {

namespace {

constexpr std::string_view kSpecialTokens[kNumSpecialTokens] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};

std::string marked(std::string_view piece) { return std::string(kContinuationMarker) + std::string(piece); }

bool has_leading_marker(std::string_view token) {
  return token.size() > kContinuationMarker.size() && token.starts_with(kContinuationMarker);
}

// Prefix segments from the morpheme segmenter look like "ha##".
bool has_trailing_marker(std::string_view token) {
  return token.size() > kContinuationMarker.size() && token.ends_with(kContinuationMarker) &&
         !token.starts_with(kContinuationMarker);
}

struct WordCounts {
  std::vector<std::string> words;  // first-appearance order
  std::vector<std::uint64_t> counts;
};

WordCounts count_words_in(const Corpus& corpus) {
  WordCounts wc;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& doc : corpus.documents) {
    for (auto word : utf8::split_words(doc.text)) {
      auto [it, inserted] = index.try_emplace(std::string(word), wc.words.size());
      if (inserted) {
        wc.words.emplace_back(word);
        wc.counts.push_back(0);
      }
      ++wc.counts[it->second];
    }
  }
  return wc;
}

// Word-initial and continuation form of every character, sorted by code point.
std::vector<std::string> char_alphabet(const WordCounts& wc, bool with_continuations) {
  std::set<std::u32string> chars;
  for (const auto& word : wc.words) {
    for (char32_t cp : utf8::decode(word)) chars.insert(std::u32string(1, cp));
  }
  std::vector<std::string> out;
  for (const auto& c : chars) {
    out.push_back(utf8::encode(c));
    if (with_continuations) out.push_back(marked(utf8::encode(c)));
  }
  return out;
}

void require_non_empty(const WordCounts& wc) {
  if (wc.words.empty()) throw Error(ErrorCode::kEmptyInput, "cannot train a vocabulary on an empty corpus");
}

}  // namespace

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kChar: return "char";
    case Scheme::kSubwordNgram: return "subword_ngram";
    case Scheme::kSubwordMorpheme: return "subword_morpheme";
    case Scheme::kWord: return "word";
  }
  return "char";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "char") return Scheme::kChar;
  if (name == "subword" || name == "subword_ngram") return Scheme::kSubwordNgram;
  if (name == "morpheme" || name == "subword_morpheme") return Scheme::kSubwordMorpheme;
  if (name == "word") return Scheme::kWord;
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown tokenization scheme '{}'", name));
}

bool is_special_id(int id) { return id >= 0 && id < kNumSpecialTokens; }

void MorphRuleTable::validate() const {
  if (min_stem_length < 1) throw Error(ErrorCode::kInvalidArgument, "min_stem_length must be at least 1");
  for (const auto* list : {&prefixes, &suffixes}) {
    for (const auto& affix : *list) {
      if (affix.empty()) throw Error(ErrorCode::kInvalidArgument, "affixes must be non-empty");
    }
  }
}

MorphRuleTable parse_rule_table(std::string_view contents) {
  MorphRuleTable rules;
  std::size_t line_no = 0;
  for (auto line : split(contents, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 2 || cols[1].empty()) {
      throw Error(ErrorCode::kParseError, fmt::format("rule table line {}: expected kind<TAB>affix", line_no));
    }
    if (cols[0] == "prefix") {
      rules.prefixes.push_back(cols[1]);
    } else if (cols[0] == "suffix") {
      rules.suffixes.push_back(cols[1]);
    } else if (cols[0] == "min_stem_length") {
      rules.min_stem_length = std::stoul(cols[1]);
    } else {
      throw Error(ErrorCode::kParseError, fmt::format("rule table line {}: unknown kind '{}'", line_no, cols[0]));
    }
  }
  rules.validate();
  return rules;
}

MorphRuleTable load_rule_table(const std::string& path) { return parse_rule_table(read_file(path)); }

MorphRuleTable merge_rule_tables(const MorphRuleTable& a, const MorphRuleTable& b) {
  MorphRuleTable out = a;
  const auto add = [](std::vector<std::string>& into, const std::vector<std::string>& from) {
    for (const auto& x : from) {
      if (std::find(into.begin(), into.end(), x) == into.end()) into.push_back(x);
    }
  };
  add(out.prefixes, b.prefixes);
  add(out.suffixes, b.suffixes);
  out.min_stem_length = std::max(a.min_stem_length, b.min_stem_length);
  return out;
}

std::string rule_table_to_text(const MorphRuleTable& rules) {
  std::string out = fmt::format("min_stem_length\t{}\n", rules.min_stem_length);
  for (const auto& p : rules.prefixes) out += fmt::format("prefix\t{}\n", p);
  for (const auto& s : rules.suffixes) out += fmt::format("suffix\t{}\n", s);
  return out;
}

Vocabulary::Vocabulary(Scheme scheme, std::vector<std::string> tokens) : scheme_(scheme) {
  tokens_.reserve(tokens.size() + kNumSpecialTokens);
  for (auto special : kSpecialTokens) tokens_.emplace_back(special);
  for (auto& token : tokens) tokens_.push_back(std::move(token));
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!token_to_id_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("duplicate vocabulary token '{}'", tokens_[i]));
    }
  }
}

std::optional<int> Vocabulary::find(std::string_view token) const {
  const auto it = token_to_id_.find(std::string(token));
  if (it == token_to_id_.end()) return std::nullopt;
  return it->second;
}

bool Vocabulary::covers_char(std::string_view ch) const { return contains(ch) || contains(marked(ch)); }

std::string corpus_digest(const Corpus& corpus) {
  std::string joined;
  for (const auto& doc : corpus.documents) {
    joined += doc.text;
    joined += '\n';
  }
  return sha256_hex(joined);
}

Vocabulary train_char_vocab(const Corpus& corpus, bool positional_chars) {
  const WordCounts wc = count_words_in(corpus);
  require_non_empty(wc);
  Vocabulary vocab(Scheme::kChar, char_alphabet(wc, positional_chars));
  vocab.set_positional_chars(positional_chars);
  vocab.set_corpus_digest(corpus_digest(corpus));
  return vocab;
}

Vocabulary train_subword_vocab(const Corpus& corpus, int target_size, int min_pair_frequency) {
  const WordCounts wc = count_words_in(corpus);
  require_non_empty(wc);

  std::vector<std::string> symbols = char_alphabet(wc, true);
  const int base_size = static_cast<int>(symbols.size()) + kNumSpecialTokens;
  if (target_size < base_size) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("target size {} is below the alphabet size {}", target_size, base_size));
  }
  std::unordered_map<std::string, int> symbol_id;
  for (std::size_t i = 0; i < symbols.size(); ++i) symbol_id.emplace(symbols[i], static_cast<int>(i));

  // Current segmentation of every word type.
  std::vector<std::vector<int>> segs(wc.words.size());
  for (std::size_t w = 0; w < wc.words.size(); ++w) {
    const auto chars = utf8::chars(wc.words[w]);
    for (std::size_t i = 0; i < chars.size(); ++i) {
      segs[w].push_back(symbol_id.at(i == 0 ? chars[i] : marked(chars[i])));
    }
  }

  struct PairStats {
    std::uint64_t count = 0;
    std::uint64_t first_seen = 0;
  };
  std::vector<std::string> vocab_tokens = symbols;
  std::set<std::string> in_vocab(symbols.begin(), symbols.end());
  bool truncated = false;

  while (static_cast<int>(vocab_tokens.size()) + kNumSpecialTokens < target_size) {
    std::vector<std::uint64_t> unit(symbols.size(), 0);
    std::unordered_map<std::uint64_t, PairStats> pairs;
    std::uint64_t scan = 0;
    for (std::size_t w = 0; w < segs.size(); ++w) {
      const auto& seg = segs[w];
      for (std::size_t i = 0; i < seg.size(); ++i) {
        unit[static_cast<std::size_t>(seg[i])] += wc.counts[w];
        if (i + 1 < seg.size()) {
          const std::uint64_t key = (static_cast<std::uint64_t>(seg[i]) << 32) | static_cast<std::uint32_t>(seg[i + 1]);
          auto [it, inserted] = pairs.try_emplace(key);
          if (inserted) it->second.first_seen = scan;
          it->second.count += wc.counts[w];
          ++scan;
        }
      }
    }

    // Best score pc / (ua * ub), compared exactly by cross-multiplication;
    // ties go to the more frequent pair, then to the pair seen first.
    std::uint64_t best_key = 0;
    const PairStats* best = nullptr;
    unsigned __int128 best_den = 1;
    for (const auto& [key, stats] : pairs) {
      if (stats.count < static_cast<std::uint64_t>(min_pair_frequency)) continue;
      const unsigned __int128 den = static_cast<unsigned __int128>(unit[key >> 32]) * unit[key & 0xffffffffULL];
      if (best != nullptr) {
        const unsigned __int128 lhs = static_cast<unsigned __int128>(stats.count) * best_den;
        const unsigned __int128 rhs = static_cast<unsigned __int128>(best->count) * den;
        if (lhs < rhs) continue;
        if (lhs == rhs) {
          if (stats.count < best->count) continue;
          if (stats.count == best->count && stats.first_seen > best->first_seen) continue;
        }
      }
      best = &stats;
      best_key = key;
      best_den = den;
    }
    if (best == nullptr) {
      truncated = true;
      break;
    }

    const int a = static_cast<int>(best_key >> 32);
    const int b = static_cast<int>(best_key & 0xffffffffULL);
    const std::string& right = symbols[static_cast<std::size_t>(b)];
    std::string merged = symbols[static_cast<std::size_t>(a)] + right.substr(kContinuationMarker.size());
    auto [it, inserted] = symbol_id.try_emplace(merged, static_cast<int>(symbols.size()));
    if (inserted) symbols.push_back(merged);
    const int merged_id = it->second;
    if (in_vocab.insert(merged).second) vocab_tokens.push_back(merged);

    for (auto& seg : segs) {
      std::vector<int> next;
      next.reserve(seg.size());
      for (std::size_t i = 0; i < seg.size(); ++i) {
        if (i + 1 < seg.size() && seg[i] == a && seg[i + 1] == b) {
          next.push_back(merged_id);
          ++i;
        } else {
          next.push_back(seg[i]);
        }
      }
      seg = std::move(next);
    }
  }

  Vocabulary vocab(Scheme::kSubwordNgram, std::move(vocab_tokens));
  vocab.set_truncated(truncated);
  vocab.set_corpus_digest(corpus_digest(corpus));
  return vocab;
}

Vocabulary train_word_vocab(const Corpus& corpus, double trim_quantile) {
  if (!(trim_quantile >= 0.0 && trim_quantile < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "trim_quantile must lie in [0, 1)");
  }
  const WordCounts wc = count_words_in(corpus);
  require_non_empty(wc);

  std::vector<std::uint64_t> freqs = wc.counts;
  std::sort(freqs.begin(), freqs.end());
  double threshold = -1.0;
  if (trim_quantile > 0.0) {
    const double pos = trim_quantile * static_cast<double>(freqs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    threshold = static_cast<double>(freqs[lo]) +
                (pos - static_cast<double>(lo)) * (static_cast<double>(freqs[hi]) - static_cast<double>(freqs[lo]));
  }

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < wc.words.size(); ++i) {
    if (static_cast<double>(wc.counts[i]) > threshold) kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end(), [&](std::size_t x, std::size_t y) {
    if (wc.counts[x] != wc.counts[y]) return wc.counts[x] > wc.counts[y];
    return wc.words[x] < wc.words[y];
  });
  std::vector<std::string> tokens;
  tokens.reserve(kept.size());
  for (auto i : kept) tokens.push_back(wc.words[i]);
  Vocabulary vocab(Scheme::kWord, std::move(tokens));
  vocab.set_corpus_digest(corpus_digest(corpus));
  return vocab;
}

std::vector<std::string> morpheme_segment(std::string_view word, const MorphRuleTable& rules) {
  const std::u32string cps = utf8::decode(word);
  const auto by_length = [](std::vector<std::u32string> affixes) {
    std::stable_sort(affixes.begin(), affixes.end(),
                     [](const auto& x, const auto& y) { return x.size() > y.size(); });
    return affixes;
  };
  std::vector<std::u32string> prefixes;
  std::vector<std::u32string> suffixes;
  for (const auto& p : rules.prefixes) prefixes.push_back(utf8::decode(p));
  for (const auto& s : rules.suffixes) suffixes.push_back(utf8::decode(s));
  prefixes = by_length(std::move(prefixes));
  suffixes = by_length(std::move(suffixes));

  std::size_t begin = 0;
  std::size_t end = cps.size();
  for (const auto& p : prefixes) {
    if (cps.size() >= p.size() + rules.min_stem_length && std::u32string_view(cps).starts_with(p)) {
      begin = p.size();
      break;
    }
  }
  for (const auto& s : suffixes) {
    if (end - begin >= s.size() + rules.min_stem_length &&
        std::u32string_view(cps).substr(begin).ends_with(s)) {
      end -= s.size();
      break;
    }
  }

  std::vector<std::string> segments;
  if (begin > 0) segments.push_back(utf8::encode(std::u32string_view(cps).substr(0, begin)) + std::string(kContinuationMarker));
  segments.push_back(utf8::encode(std::u32string_view(cps).substr(begin, end - begin)));
  if (end < cps.size()) segments.push_back(marked(utf8::encode(std::u32string_view(cps).substr(end))));
  return segments;
}

Vocabulary train_morpheme_vocab(const Corpus& corpus, const MorphRuleTable& rules, int target_size) {
  if (target_size < 0) throw Error(ErrorCode::kInvalidArgument, "target size must be non-negative");
  rules.validate();
  const WordCounts wc = count_words_in(corpus);
  require_non_empty(wc);

  std::map<std::string, std::uint64_t> segment_counts;
  for (std::size_t w = 0; w < wc.words.size(); ++w) {
    for (auto& seg : morpheme_segment(wc.words[w], rules)) segment_counts[seg] += wc.counts[w];
  }
  std::vector<std::pair<std::string, std::uint64_t>> ranked(segment_counts.begin(), segment_counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) { return x.second > y.second; });

  std::vector<std::string> tokens = char_alphabet(wc, true);
  std::set<std::string> present(tokens.begin(), tokens.end());
  const std::size_t keep = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(target_size));
  for (std::size_t i = 0; i < keep; ++i) {
    if (present.insert(ranked[i].first).second) tokens.push_back(ranked[i].first);
  }
  Vocabulary vocab(Scheme::kSubwordMorpheme, std::move(tokens));
  vocab.set_rules(rules);
  vocab.set_truncated(ranked.size() < static_cast<std::size_t>(target_size));
  vocab.set_corpus_digest(corpus_digest(corpus));
  return vocab;
}

namespace {

// Greedy longest-match over code points; `initial` selects whether the first
// piece is word-initial. Unseen characters become unk.
void longest_match(std::u32string_view cps, bool initial, const Vocabulary& vocab, std::vector<int>& out) {
  std::size_t i = 0;
  while (i < cps.size()) {
    bool matched = false;
    for (std::size_t j = cps.size(); j > i; --j) {
      const std::string piece = utf8::encode(cps.substr(i, j - i));
      const bool first = initial && i == 0;
      if (auto id = vocab.find(first ? piece : marked(piece))) {
        out.push_back(*id);
        i = j;
        matched = true;
        break;
      }
    }
    if (!matched) {
      out.push_back(kUnkId);
      ++i;
    }
  }
}

void encode_chars(std::u32string_view cps, bool initial, const Vocabulary& vocab, std::vector<int>& out) {
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const std::string ch = utf8::encode(cps[i]);
    const bool first = initial && i == 0;
    const auto id = vocab.find(first ? ch : marked(ch));
    out.push_back(id.value_or(kUnkId));
  }
}

void encode_morpheme_word(std::string_view word, const Vocabulary& vocab, std::vector<int>& out) {
  const auto segments = morpheme_segment(word, vocab.rules());
  // After a prefix that fell back to characters, the rest of the word must use
  // continuation forms.
  bool continuing = false;
  for (const auto& seg : segments) {
    if (auto id = vocab.find(seg); id && !continuing) {
      out.push_back(*id);
      continue;
    }
    if (has_trailing_marker(seg)) {
      const auto stem = utf8::decode(std::string_view(seg).substr(0, seg.size() - kContinuationMarker.size()));
      encode_chars(stem, true, vocab, out);
      continuing = true;
    } else if (has_leading_marker(seg)) {
      if (auto id = vocab.find(seg)) {
        out.push_back(*id);
      } else {
        encode_chars(utf8::decode(std::string_view(seg).substr(kContinuationMarker.size())), false, vocab, out);
      }
    } else if (continuing) {
      if (auto id = vocab.find(marked(seg))) {
        out.push_back(*id);
      } else {
        encode_chars(utf8::decode(seg), false, vocab, out);
      }
    } else {
      encode_chars(utf8::decode(seg), true, vocab, out);
    }
  }
}

}  // namespace

std::vector<int> encode_word(std::string_view word, const Vocabulary& vocab) {
  std::vector<int> out;
  switch (vocab.scheme()) {
    case Scheme::kWord:
      out.push_back(vocab.find(word).value_or(kUnkId));
      break;
    case Scheme::kChar: {
      const auto cps = utf8::decode(word);
      if (vocab.positional_chars()) {
        encode_chars(cps, true, vocab, out);
      } else {
        for (char32_t cp : cps) out.push_back(vocab.find(utf8::encode(cp)).value_or(kUnkId));
      }
      break;
    }
    case Scheme::kSubwordNgram:
      longest_match(utf8::decode(word), true, vocab, out);
      break;
    case Scheme::kSubwordMorpheme:
      encode_morpheme_word(word, vocab, out);
      break;
  }
  return out;
}

std::vector<int> encode(std::string_view text, const Vocabulary& vocab) {
  std::vector<int> out;
  for (auto word : utf8::split_words(text)) {
    const auto ids = encode_word(word, vocab);
    out.insert(out.end(), ids.begin(), ids.end());
  }
  return out;
}

WordPieces encode_words(std::span<const std::string> words, const Vocabulary& vocab) {
  WordPieces pieces;
  for (const auto& word : words) {
    pieces.word_starts.push_back(pieces.ids.size());
    const auto ids = encode_word(word, vocab);
    pieces.ids.insert(pieces.ids.end(), ids.begin(), ids.end());
  }
  return pieces;
}

std::string decode(std::span<const int> ids, const Vocabulary& vocab) {
  std::string out;
  const bool plain_chars = vocab.scheme() == Scheme::kChar && !vocab.positional_chars();
  const bool word_scheme = vocab.scheme() == Scheme::kWord;
  bool join_next = true;
  for (int id : ids) {
    const std::string& token = vocab.token(id);
    if (plain_chars) {
      out += token;
      continue;
    }
    std::string_view piece = token;
    bool joins = join_next;
    if (!word_scheme && has_leading_marker(piece)) {
      piece.remove_prefix(kContinuationMarker.size());
      joins = true;
    }
    join_next = false;
    if (!word_scheme && vocab.scheme() == Scheme::kSubwordMorpheme && has_trailing_marker(piece)) {
      piece.remove_suffix(kContinuationMarker.size());
      join_next = true;
    }
    if (!joins && !out.empty()) out += ' ';
    out += piece;
  }
  return out;
}

double oov_rate(const Vocabulary& vocab, const Corpus& test) {
  std::size_t total = 0;
  std::size_t oov = 0;
  for (const auto& doc : test.documents) {
    for (auto word : utf8::split_words(doc.text)) {
      ++total;
      if (vocab.scheme() == Scheme::kWord) {
        if (!vocab.contains(word)) ++oov;
      } else {
        const auto chars = utf8::chars(word);
        if (std::any_of(chars.begin(), chars.end(), [&](const std::string& c) { return !vocab.covers_char(c); })) ++oov;
      }
    }
  }
  if (total == 0) throw Error(ErrorCode::kEmptyInput, "OOV rate needs a non-empty test corpus");
  return static_cast<double>(oov) / static_cast<double>(total);
}

std::string vocabulary_to_text(const Vocabulary& vocab) {
  std::string out;
  out += fmt::format("# scheme={}\n", to_string(vocab.scheme()));
  out += fmt::format("# size={}\n", vocab.size());
  out += fmt::format("# marker={}\n", kContinuationMarker);
  out += fmt::format("# corpus_digest={}\n", vocab.corpus_digest());
  out += fmt::format("# truncated={}\n", vocab.truncated() ? 1 : 0);
  out += fmt::format("# positional_chars={}\n", vocab.positional_chars() ? 1 : 0);
  out += fmt::format("# format_version={}\n", kFormatVersion);
  if (vocab.scheme() == Scheme::kSubwordMorpheme) {
    out += fmt::format("# min_stem_length={}\n", vocab.rules().min_stem_length);
    for (const auto& p : vocab.rules().prefixes) out += fmt::format("# prefix={}\n", p);
    for (const auto& s : vocab.rules().suffixes) out += fmt::format("# suffix={}\n", s);
  }
  for (const auto& token : vocab.tokens()) {
    out += token;
    out += '\n';
  }
  return out;
}

Vocabulary vocabulary_from_text(std::string_view contents) {
  std::map<std::string, std::string> header;
  MorphRuleTable rules;
  std::vector<std::string> tokens;
  bool in_header = true;
  auto lines = split(contents, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& line : lines) {
    if (in_header && line.starts_with("# ")) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "prefix") {
        rules.prefixes.push_back(value);
      } else if (key == "suffix") {
        rules.suffixes.push_back(value);
      } else {
        header[key] = value;
      }
      continue;
    }
    in_header = false;
    tokens.push_back(std::move(line));
  }
  if (!header.contains("scheme")) throw Error(ErrorCode::kParseError, "vocabulary file lacks a scheme header");
  if (tokens.size() < kNumSpecialTokens) throw Error(ErrorCode::kParseError, "vocabulary file lacks special tokens");
  for (int i = 0; i < kNumSpecialTokens; ++i) {
    if (tokens[static_cast<std::size_t>(i)] != kSpecialTokens[i]) {
      throw Error(ErrorCode::kParseError, fmt::format("special token {} out of place", kSpecialTokens[i]));
    }
  }
  Vocabulary vocab(parse_scheme(header["scheme"]),
                   std::vector<std::string>(tokens.begin() + kNumSpecialTokens, tokens.end()));
  if (header.contains("size") && std::stoi(header["size"]) != vocab.size()) {
    throw Error(ErrorCode::kParseError, "vocabulary size header does not match token count");
  }
  vocab.set_truncated(header["truncated"] == "1");
  vocab.set_positional_chars(header["positional_chars"] == "1");
  vocab.set_corpus_digest(header["corpus_digest"]);
  if (header.contains("min_stem_length")) rules.min_stem_length = std::stoul(header["min_stem_length"]);
  vocab.set_rules(std::move(rules));
  return vocab;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) { write_file(path, vocabulary_to_text(vocab)); }

Vocabulary load_vocabulary(const std::string& path) { return vocabulary_from_text(read_file(path)); }

}  // namespace mrl
