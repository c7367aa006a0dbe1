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

#include "mrl/annotation.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include <fmt/format.h>

#include "mrl/common.hpp"

namespace mrl {

namespace {

std::map<std::string, long> tally(std::span<const std::string> item) {
  std::map<std::string, long> counts;
  for (const auto& v : item) ++counts[v];
  return counts;
}

// Ordered pairs of differing ratings within an item.
double differing_pairs(std::span<const std::string> item) {
  const double m = static_cast<double>(item.size());
  double same = 0.0;
  for (const auto& [label, c] : tally(item)) same += static_cast<double>(c) * static_cast<double>(c);
  return m * m - same;
}

double numeric_label(Sentiment s, const std::string& label) {
  const int idx = label_index(s, label);
  return is_emotion(s) ? idx : idx - 1;
}

}  // namespace

void RatingRecord::validate() const {
  if (comment_id.empty() || rater_id.empty()) throw Error(ErrorCode::kInvalidArgument, "rating without comment or rater id");
  const int lo = is_emotion(sentiment) ? 0 : -2;
  if (raw_rating < lo || raw_rating > 2) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("rating {} outside the {} scale [{}, 2]", raw_rating,
                                                         to_string(sentiment), lo));
  }
}

std::string coarsen(Sentiment sentiment, int raw_rating) {
  if (is_emotion(sentiment)) return raw_rating > 0 ? "expressed" : "not_expressed";
  if (raw_rating < 0) return "negative";
  return raw_rating == 0 ? "neutral" : "positive";
}

std::string coarsen(const RatingRecord& record) { return coarsen(record.sentiment, record.raw_rating); }

std::vector<RatingRecord> parse_ratings_csv(std::string_view contents) {
  std::vector<RatingRecord> out;
  std::size_t line_no = 0;
  for (std::string line : split(contents, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto f = split(line, ',');
    if (f.size() != 4) throw Error(ErrorCode::kParseError, fmt::format("ratings line {}: expected 4 columns", line_no));
    if (f[0] == "comment_id") continue;
    RatingRecord r{f[0], f[1], parse_sentiment(f[2]), 0};
    try {
      std::size_t used = 0;
      r.raw_rating = std::stoi(f[3], &used);
      if (used != f[3].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParseError, fmt::format("ratings line {}: bad rating '{}'", line_no, f[3]));
    }
    try {
      r.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::kParseError, fmt::format("ratings line {}: {}", line_no, e.what()));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RatingRecord> load_ratings(const std::string& path) { return parse_ratings_csv(read_file(path)); }

std::string ratings_to_csv(std::span<const RatingRecord> records) {
  std::string out = "comment_id,rater_id,sentiment,raw_rating\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{}\n", r.comment_id, r.rater_id, to_string(r.sentiment), r.raw_rating);
  }
  return out;
}

double observed_disagreement(std::span<const std::string> item) {
  if (item.size() < 2) throw Error(ErrorCode::kNoPairs, "an item needs two ratings to disagree");
  const double m = static_cast<double>(item.size());
  return differing_pairs(item) / (m * (m - 1.0));
}

double expected_disagreement(std::span<const std::vector<std::string>> items) {
  std::map<std::string, double> margins;
  double n = 0.0;
  for (const auto& item : items) {
    if (item.size() < 2) continue;
    for (const auto& v : item) margins[v] += 1.0;
    n += static_cast<double>(item.size());
  }
  if (n == 0.0) throw Error(ErrorCode::kNoPairs, "no item has two or more ratings");
  double same = 0.0;
  for (const auto& [label, c] : margins) same += c * c;
  return (n * n - same) / (n * (n - 1.0));
}

double krippendorff_alpha(std::span<const std::vector<std::string>> items) {
  const double de = expected_disagreement(items);
  double n = 0.0, disagree = 0.0;
  for (const auto& item : items) {
    if (item.size() < 2) continue;
    n += static_cast<double>(item.size());
    disagree += differing_pairs(item) / (static_cast<double>(item.size()) - 1.0);
  }
  if (de == 0.0) return 1.0;
  return 1.0 - (disagree / n) / de;
}

std::size_t ReliabilityReport::kept_count() const {
  return static_cast<std::size_t>(std::count_if(items.begin(), items.end(), [](const auto& i) { return i.kept; }));
}

ReliabilityReport filter_reliable(std::span<const RatingRecord> records, double threshold, std::size_t min_raters) {
  ReliabilityReport report;
  report.threshold = threshold;
  report.min_raters = min_raters;
  std::map<std::pair<std::string, Sentiment>, std::map<std::string, std::string>> grouped;
  for (const auto& r : records) {
    r.validate();
    auto& by_rater = grouped[{r.comment_id, r.sentiment}];
    if (!by_rater.emplace(r.rater_id, coarsen(r)).second) {
      throw Error(ErrorCode::kParseError, fmt::format("rater '{}' rated ({}, {}) twice", r.rater_id, r.comment_id,
                                                      to_string(r.sentiment)));
    }
  }
  std::map<Sentiment, std::vector<std::vector<std::string>>> per_sentiment;
  for (const auto& [key, by_rater] : grouped) {
    std::vector<std::string> labels;
    for (const auto& [rater, label] : by_rater) labels.push_back(label);
    per_sentiment[key.second].push_back(std::move(labels));
  }
  for (const auto& [s, items] : per_sentiment) {
    try {
      report.expected[s] = expected_disagreement(items);
    } catch (const Error&) {
      // every item of this sentiment is single-rated
    }
  }
  for (const auto& [key, by_rater] : grouped) {
    ReliabilityItem item;
    item.comment_id = key.first;
    item.sentiment = key.second;
    item.raters = by_rater.size();
    std::vector<std::string> labels;
    for (const auto& [rater, label] : by_rater) {
      labels.push_back(label);
      ++item.distribution[label];
    }
    if (labels.size() >= 2) {
      const double de = report.expected.at(item.sentiment);
      item.alpha = de == 0.0 ? 1.0 : 1.0 - observed_disagreement(labels) / de;
    }
    int best = 0;
    int best_count = 0;
    for (const auto& [label, c] : item.distribution) {
      if (c > best) {
        best = c;
        best_count = 1;
        item.consensus = label;
      } else if (c == best) {
        ++best_count;
      }
    }
    if (best_count > 1) item.consensus.reset();
    if (item.raters < min_raters) {
      item.reason = "too_few_raters";
    } else if (!item.alpha || *item.alpha < threshold) {
      item.reason = "low_alpha";
    } else if (!item.consensus) {
      item.reason = "tied_majority";
    } else {
      item.kept = true;
    }
    report.items.push_back(std::move(item));
  }
  return report;
}

std::vector<LabeledItem> consensus_labels(const ReliabilityReport& report, int iteration) {
  std::vector<LabeledItem> out;
  for (const auto& item : report.items) {
    if (item.kept) out.push_back({item.comment_id, item.sentiment, *item.consensus, iteration});
  }
  return out;
}

nlohmann::json reliability_to_json(const ReliabilityReport& report) {
  nlohmann::json j;
  j["threshold"] = report.threshold;
  j["min_raters"] = report.min_raters;
  j["kept"] = report.kept_count();
  j["total"] = report.items.size();
  for (const auto& [s, de] : report.expected) j["expected_disagreement"][std::string(to_string(s))] = de;
  j["items"] = nlohmann::json::array();
  for (const auto& item : report.items) {
    nlohmann::json e;
    e["comment_id"] = item.comment_id;
    e["sentiment"] = to_string(item.sentiment);
    e["distribution"] = item.distribution;
    e["raters"] = item.raters;
    e["alpha"] = item.alpha ? nlohmann::json(*item.alpha) : nlohmann::json(nullptr);
    e["kept"] = item.kept;
    e["consensus"] = item.consensus ? nlohmann::json(*item.consensus) : nlohmann::json(nullptr);
    if (!item.reason.empty()) e["reason"] = item.reason;
    j["items"].push_back(std::move(e));
  }
  return j;
}

std::string labeled_pool_to_csv(std::span<const LabeledItem> pool) {
  std::string out = "comment_id,sentiment,label,iteration\n";
  for (const auto& i : pool) out += fmt::format("{},{},{},{}\n", i.comment_id, to_string(i.sentiment), i.label, i.iteration);
  return out;
}

std::vector<LabeledItem> parse_labeled_pool_csv(std::string_view contents) {
  std::vector<LabeledItem> out;
  std::size_t line_no = 0;
  for (std::string line : split(contents, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto f = split(line, ',');
    if (f.size() != 4) throw Error(ErrorCode::kParseError, fmt::format("pool line {}: expected 4 columns", line_no));
    if (f[0] == "comment_id") continue;
    LabeledItem item{f[0], parse_sentiment(f[1]), f[2], 0};
    label_index(item.sentiment, item.label);
    try {
      item.iteration = std::stoi(f[3]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParseError, fmt::format("pool line {}: bad iteration '{}'", line_no, f[3]));
    }
    out.push_back(std::move(item));
  }
  return out;
}

std::string score_table_to_csv(const ScoreTable& scores) {
  std::string out = "document_id";
  for (std::size_t c = 0; c < kNumCategories; ++c) out += fmt::format(",{}", to_string(static_cast<Category>(c)));
  out += '\n';
  for (const auto& [id, row] : scores) {
    out += id;
    for (const double v : row) out += fmt::format(",{:.9g}", v);
    out += '\n';
  }
  return out;
}

ScoreTable parse_score_table_csv(std::string_view contents) {
  std::vector<std::string> lines;
  for (auto& line : split(contents, '\n')) {
    if (!line.starts_with("#")) lines.push_back(std::move(line));
  }
  if (lines.empty() || lines[0].empty()) throw Error(ErrorCode::kParseError, "score table without header");
  const auto header = split(lines[0], ',');
  if (header.empty() || header[0] != "document_id") throw Error(ErrorCode::kParseError, "score table must start with document_id");
  std::array<std::size_t, kNumCategories> column{};
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    const auto name = to_string(static_cast<Category>(c));
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::kParseError, fmt::format("score table lacks column '{}'", name));
    column[c] = static_cast<std::size_t>(it - header.begin());
  }
  ScoreTable out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::string line = lines[i];
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) throw Error(ErrorCode::kParseError, fmt::format("score table line {}: wrong column count", i + 1));
    auto& row = out[f[0]];
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      try {
        row[c] = std::stod(f[column[c]]);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kParseError, fmt::format("score table line {}: bad number '{}'", i + 1, f[column[c]]));
      }
    }
  }
  return out;
}

SelectionResult select_for_annotation(const ScoreTable& scores, std::size_t k, const std::set<std::string>& excluded) {
  SelectionResult out;
  std::vector<std::pair<std::string, const std::array<double, kNumCategories>*>> pool;
  for (const auto& [id, s] : scores) {
    if (!excluded.contains(id)) pool.emplace_back(id, &s);
  }
  if (k == 0) return out;
  if (pool.size() < k) {
    out.warnings.push_back(fmt::format("pool of {} documents is smaller than k = {}; every document is returned",
                                       pool.size(), k));
  }
  const auto pick = [&](std::size_t category, bool descending) {
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [id, s] : pool) ranked.emplace_back(descending ? -(*s)[category] : (*s)[category], id);
    const std::size_t n = std::min(k, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n), ranked.end());
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back(ranked[i].second);
    return ids;
  };
  std::set<std::string> all;
  for (const Sentiment s : kAllSentiments) {
    if (is_emotion(s)) {
      const auto c = static_cast<std::size_t>(category_of(s));
      out.high[s] = pick(c, true);
      out.low[s] = pick(c, false);
    } else {
      out.high[s] = pick(static_cast<std::size_t>(Category::kPositive), true);
      out.low[s] = pick(static_cast<std::size_t>(Category::kNegative), true);
    }
    for (const auto* list : {&out.high[s], &out.low[s]}) {
      out.pre_dedup_count += list->size();
      all.insert(list->begin(), list->end());
    }
  }
  out.ids.assign(all.begin(), all.end());
  return out;
}

nlohmann::json selection_to_json(const SelectionResult& selection) {
  nlohmann::json j;
  j["pre_dedup_count"] = selection.pre_dedup_count;
  j["selected_count"] = selection.ids.size();
  j["ids"] = selection.ids;
  for (const auto& [s, ids] : selection.high) j["high"][std::string(to_string(s))] = ids;
  for (const auto& [s, ids] : selection.low) j["low"][std::string(to_string(s))] = ids;
  j["warnings"] = selection.warnings;
  return j;
}

CorrelationMatrix emotion_correlation(std::span<const LabeledItem> pool) {
  std::map<std::string, std::array<std::optional<double>, kNumSentiments>> values;
  for (const auto& item : pool) values[item.comment_id][index_of(item.sentiment)] = numeric_label(item.sentiment, item.label);
  CorrelationMatrix m;
  m.r.setZero();
  m.defined.setConstant(false);
  m.n.setZero();
  for (std::size_t i = 0; i < kNumSentiments; ++i) {
    m.r(i, i) = 1.0;
    m.defined(i, i) = true;
    for (const auto& [id, v] : values) m.n(i, i) += v[i] ? 1 : 0;
    for (std::size_t j = i + 1; j < kNumSentiments; ++j) {
      std::vector<double> xs, ys;
      for (const auto& [id, v] : values) {
        if (v[i] && v[j]) {
          xs.push_back(*v[i]);
          ys.push_back(*v[j]);
        }
      }
      m.n(i, j) = m.n(j, i) = static_cast<long>(xs.size());
      if (xs.size() < 2) continue;
      const double cnt = static_cast<double>(xs.size());
      double mx = 0.0, my = 0.0;
      for (std::size_t t = 0; t < xs.size(); ++t) mx += xs[t], my += ys[t];
      mx /= cnt;
      my /= cnt;
      double sxy = 0.0, sxx = 0.0, syy = 0.0;
      for (std::size_t t = 0; t < xs.size(); ++t) {
        sxy += (xs[t] - mx) * (ys[t] - my);
        sxx += (xs[t] - mx) * (xs[t] - mx);
        syy += (ys[t] - my) * (ys[t] - my);
      }
      if (sxx == 0.0 || syy == 0.0) continue;
      const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
      m.r(i, j) = m.r(j, i) = r;
      m.defined(i, j) = m.defined(j, i) = true;
    }
  }
  return m;
}

std::string correlation_to_csv(const CorrelationMatrix& m) {
  std::string out = "sentiment";
  for (const Sentiment s : kAllSentiments) out += fmt::format(",{}", to_string(s));
  out += '\n';
  for (std::size_t i = 0; i < kNumSentiments; ++i) {
    out += to_string(kAllSentiments[i]);
    for (std::size_t j = 0; j < kNumSentiments; ++j) {
      out += m.defined(i, j) ? fmt::format(",{:.6f}", m.r(i, j)) : std::string(",NA");
    }
    out += '\n';
  }
  return out;
}

nlohmann::json correlation_to_json(const CorrelationMatrix& m) {
  nlohmann::json j;
  std::vector<std::string> names;
  for (const Sentiment s : kAllSentiments) names.emplace_back(to_string(s));
  j["sentiments"] = names;
  j["r"] = nlohmann::json::array();
  j["n"] = nlohmann::json::array();
  for (std::size_t i = 0; i < kNumSentiments; ++i) {
    nlohmann::json row = nlohmann::json::array(), counts = nlohmann::json::array();
    for (std::size_t k = 0; k < kNumSentiments; ++k) {
      row.push_back(m.defined(i, k) ? nlohmann::json(m.r(i, k)) : nlohmann::json(nullptr));
      counts.push_back(m.n(i, k));
    }
    j["r"].push_back(std::move(row));
    j["n"].push_back(std::move(counts));
  }
  return j;
}

}  // namespace mrl
