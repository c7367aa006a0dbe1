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

#include <cmath>

#include "doctest.h"
#include "mrl/common.hpp"
#include "mrl/metrics.hpp"
#include "mrl/random.hpp"

using namespace mrl;

TEST_CASE("metrics agree with per-class counting") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + static_cast<int>(rng.index(4));
    const int n = 1 + static_cast<int>(rng.index(40));
    std::vector<int> gold(n), pred(n);
    for (int i = 0; i < n; ++i) {
      gold[i] = static_cast<int>(rng.index(k));
      pred[i] = rng.bernoulli(0.6) ? gold[i] : static_cast<int>(rng.index(k));
    }
    std::vector<std::string> labels;
    for (int c = 0; c < k; ++c) labels.push_back("c" + std::to_string(c));
    const auto r = evaluate(pred, gold, labels);
    double weighted = 0.0;
    int correct = 0;
    for (int c = 0; c < k; ++c) {
      int tp = 0, fp = 0, fn = 0;
      for (int i = 0; i < n; ++i) {
        tp += pred[i] == c && gold[i] == c;
        fp += pred[i] == c && gold[i] != c;
        fn += pred[i] != c && gold[i] == c;
      }
      const double p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
      const double rc = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
      const double f = p + rc == 0.0 ? 0.0 : 2 * p * rc / (p + rc);
      CHECK(r.per_class[c].precision == p);
      CHECK(r.per_class[c].recall == rc);
      CHECK(r.per_class[c].f1 == doctest::Approx(f).epsilon(1e-15));
      CHECK(r.per_class[c].support == tp + fn);
      weighted += f * (tp + fn);
      correct += tp;
    }
    CHECK(r.accuracy == static_cast<double>(correct) / n);
    CHECK(r.weighted_f1 == doctest::Approx(weighted / n).epsilon(1e-12));
    CHECK(r.confusion.sum() == n);
  }
}

TEST_CASE("f1 of equal precision and recall is that value") {
  CHECK(f1_score(0.97, 0.97) == doctest::Approx(0.97).epsilon(1e-15));
  CHECK(f1_score(0.0, 0.0) == 0.0);
  CHECK(f1_score(1.0, 0.5) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("string labels and validation") {
  const std::vector<std::string> gold{"a", "b", "b"}, pred{"a", "a", "b"};
  const auto r = evaluate(pred, gold, {"a", "b"});
  CHECK(r.confusion(1, 0) == 1);
  CHECK(r.accuracy == doctest::Approx(2.0 / 3.0));
  const std::vector<std::string> bad{"a", "z", "b"};
  CHECK_THROWS_AS(evaluate(bad, gold, {"a", "b"}), Error);
  const std::vector<int> p1{0}, g2{0, 1};
  CHECK_THROWS_AS(evaluate(p1, g2, {"a", "b"}), Error);
  const std::vector<int> none;
  CHECK_THROWS_AS(evaluate(none, none, {"a", "b"}), Error);
}

TEST_CASE("metrics json round trips") {
  const std::vector<int> gold{0, 1, 2, 2, 1}, pred{0, 2, 2, 1, 1};
  const auto r = evaluate(pred, gold, {"neg", "neu", "pos"});
  const auto back = metrics_from_json(metrics_to_json(r));
  CHECK(back.labels == r.labels);
  CHECK(back.confusion == r.confusion);
  CHECK(back.weighted_f1 == r.weighted_f1);
  CHECK(metrics_to_json(back) == metrics_to_json(r));
}

TEST_CASE("percentiles interpolate linearly") {
  const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  CHECK(percentile(v, 0) == 1.0);
  CHECK(percentile(v, 100) == 4.0);
  // Position 0.5 * 3 = 1.5 between 2 and 3.
  CHECK(percentile(v, 50) == doctest::Approx(2.5));
  CHECK(percentile(v, 2.5) == doctest::Approx(1.075));
  CHECK_THROWS_AS(percentile({}, 50), Error);
}

TEST_CASE("summary uses the sample standard deviation") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto s = summarize(v);
  CHECK(s.mean == 2.5);
  CHECK(s.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(s.n == 4);
  CHECK(s.p2_5 <= s.mean);
  CHECK(s.p97_5 >= s.mean);
}
