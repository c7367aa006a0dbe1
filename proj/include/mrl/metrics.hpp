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

#ifndef MRL_METRICS_HPP_
#define MRL_METRICS_HPP_

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

namespace mrl {

using ConfusionMatrix = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>;

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long support = 0;
};

// Rows of `confusion` are gold classes, columns predicted classes.
struct MetricsReport {
  std::vector<std::string> labels;
  ConfusionMatrix confusion;
  std::vector<ClassMetrics> per_class;
  double weighted_f1 = 0.0;
  double accuracy = 0.0;
  long total = 0;

  std::vector<long> support() const;
};

// Harmonic mean; 0 when both inputs are 0.
double f1_score(double precision, double recall);

// Precision, recall and F1 per class with 0/0 taken as 0; weighted F1 is the
// support-weighted mean of per-class F1.
MetricsReport evaluate(std::span<const int> predictions, std::span<const int> gold, std::vector<std::string> labels);
MetricsReport evaluate(std::span<const std::string> predictions, std::span<const std::string> gold,
                       std::vector<std::string> labels);

nlohmann::json metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const nlohmann::json& j);

struct SummaryStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  double p2_5 = 0.0;
  double p97_5 = 0.0;
  std::size_t n = 0;
};

// Linear-interpolation percentile, q in [0, 100].
double percentile(std::vector<double> values, double q);
SummaryStats summarize(std::span<const double> values);
nlohmann::json summary_to_json(const SummaryStats& s);

}  // namespace mrl

#endif  // MRL_METRICS_HPP_
