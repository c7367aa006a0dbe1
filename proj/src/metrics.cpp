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

#include "mrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/core.h>

#include "mrl/common.hpp"

namespace mrl {

using nlohmann::json;

std::vector<long> MetricsReport::support() const {
  std::vector<long> out;
  for (const auto& c : per_class) out.push_back(c.support);
  return out;
}

double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

MetricsReport evaluate(std::span<const int> predictions, std::span<const int> gold, std::vector<std::string> labels) {
  if (predictions.size() != gold.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} predictions for {} gold labels", predictions.size(), gold.size()));
  }
  if (gold.empty()) throw Error(ErrorCode::kEmptyInput, "nothing to evaluate");
  const auto k = static_cast<Eigen::Index>(labels.size());
  MetricsReport report;
  report.labels = std::move(labels);
  report.confusion = ConfusionMatrix::Zero(k, k);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || gold[i] >= k || predictions[i] < 0 || predictions[i] >= k) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("label index out of range at position {}", i));
    }
    ++report.confusion(gold[i], predictions[i]);
  }
  report.total = static_cast<long>(gold.size());
  double weighted = 0.0;
  for (Eigen::Index c = 0; c < k; ++c) {
    const long tp = report.confusion(c, c);
    const long predicted = report.confusion.col(c).sum();
    const long support = report.confusion.row(c).sum();
    ClassMetrics m;
    m.precision = predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    m.recall = support > 0 ? static_cast<double>(tp) / static_cast<double>(support) : 0.0;
    m.f1 = f1_score(m.precision, m.recall);
    m.support = support;
    weighted += static_cast<double>(support) * m.f1;
    report.per_class.push_back(m);
  }
  report.weighted_f1 = weighted / static_cast<double>(report.total);
  report.accuracy = static_cast<double>(report.confusion.trace()) / static_cast<double>(report.total);
  return report;
}

MetricsReport evaluate(std::span<const std::string> predictions, std::span<const std::string> gold,
                       std::vector<std::string> labels) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < labels.size(); ++i) index[labels[i]] = static_cast<int>(i);
  const auto lookup = [&index](const std::string& name) {
    const auto it = index.find(name);
    if (it == index.end()) throw Error(ErrorCode::kInvalidArgument, fmt::format("label '{}' outside the label space", name));
    return it->second;
  };
  std::vector<int> p, g;
  for (const auto& s : predictions) p.push_back(lookup(s));
  for (const auto& s : gold) g.push_back(lookup(s));
  return evaluate(p, g, std::move(labels));
}

json metrics_to_json(const MetricsReport& r) {
  json confusion = json::array();
  for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < r.confusion.cols(); ++j) row.push_back(r.confusion(i, j));
    confusion.push_back(row);
  }
  json per_class = json::array();
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const auto& m = r.per_class[c];
    per_class.push_back({{"label", r.labels[c]}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}});
  }
  return {{"labels", r.labels},     {"confusion", confusion},   {"per_class", per_class},
          {"weighted_f1", r.weighted_f1}, {"accuracy", r.accuracy}, {"support", r.support()},
          {"total", r.total}};
}

MetricsReport metrics_from_json(const json& j) {
  MetricsReport r;
  r.labels = j.at("labels").get<std::vector<std::string>>();
  const auto k = static_cast<Eigen::Index>(r.labels.size());
  r.confusion = ConfusionMatrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index c = 0; c < k; ++c) r.confusion(i, c) = j.at("confusion")[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].get<long>();
  }
  for (const auto& m : j.at("per_class")) {
    r.per_class.push_back({m.at("precision").get<double>(), m.at("recall").get<double>(), m.at("f1").get<double>(),
                           m.at("support").get<long>()});
  }
  r.weighted_f1 = j.at("weighted_f1").get<double>();
  r.accuracy = j.at("accuracy").get<double>();
  r.total = j.at("total").get<long>();
  return r;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

SummaryStats summarize(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "summary of an empty sample");
  SummaryStats s;
  s.n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  const std::vector<double> copy(values.begin(), values.end());
  s.p2_5 = percentile(copy, 2.5);
  s.p97_5 = percentile(copy, 97.5);
  return s;
}

json summary_to_json(const SummaryStats& s) {
  return {{"mean", s.mean}, {"std", s.stddev}, {"p2_5", s.p2_5}, {"p97_5", s.p97_5}, {"n", s.n}};
}

}  // namespace mrl
