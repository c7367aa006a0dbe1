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

#include <set>

#include "doctest.h"
#include "mrl/common.hpp"
#include "mrl/random.hpp"
#include "mrl/sentiment.hpp"
#include "mrl/utf8.hpp"
#include "support.hpp"

using namespace mrl;

TEST_CASE("sha256 matches published test vectors") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("seed derivation is stable and label sensitive") {
  CHECK(derive_seed(7, "a") == derive_seed(7, "a"));
  CHECK(derive_seed(7, "a") != derive_seed(7, "b"));
  CHECK(derive_seed(7, "a") != derive_seed(8, "a"));
  CHECK(derive_seed(7, std::uint64_t{0}) != derive_seed(7, std::uint64_t{1}));
  CHECK(stable_hash("x", 1) != stable_hash("x", 2));
}

TEST_CASE("rng draws stay in range and repeat under a seed") {
  Rng a(3), b(3);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.uniform());
    CHECK(a.index(7) < 7);
    b.index(7);
  }
  std::vector<int> v{1, 2, 3, 4, 5, 6};
  Rng(9).shuffle(v);
  CHECK(std::multiset<int>(v.begin(), v.end()) == std::multiset<int>{1, 2, 3, 4, 5, 6});
}

TEST_CASE("normal draws have unit moments") {
  Rng rng(11);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("file helpers round trip") {
  testing::TempDir dir;
  const std::string p = dir.file("nested/a.txt");
  write_file(p, "one\ntwo\n");
  CHECK(read_file(p) == "one\ntwo\n");
  CHECK(read_lines(p) == std::vector<std::string>{"one", "two"});
  CHECK_THROWS_AS(read_file(dir.file("missing")), Error);
}

TEST_CASE("split keeps empty fields") {
  CHECK(split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
  CHECK(split("", ',') == std::vector<std::string>{""});
}

TEST_CASE("utf8 decode and encode are inverse") {
  const std::string text = "שלום world";
  CHECK(utf8::encode(utf8::decode(text)) == text);
  CHECK(utf8::length(text) == 10);
  CHECK(utf8::chars("אב").size() == 2);
  CHECK(utf8::decode("\xff")[0] == U'�');
}

TEST_CASE("word splitting ignores punctuation-only runs") {
  const auto words = utf8::split_words("  hi,  there !! ");
  REQUIRE(words.size() == 3);
  CHECK(utf8::is_word(words[0]));
  CHECK_FALSE(utf8::is_word(words[2]));
  CHECK(utf8::trim_punctuation("\"hi,\"") == "hi");
}

TEST_CASE("sentiment names round trip") {
  for (const Sentiment s : kAllSentiments) CHECK(parse_sentiment(to_string(s)) == s);
  CHECK_THROWS_AS(parse_sentiment("boredom"), Error);
  CHECK(label_space(Sentiment::kPolarity).size() == 3);
  CHECK(label_space(Sentiment::kJoy).size() == 2);
  for (const Sentiment s : kAllSentiments) {
    if (is_emotion(s)) CHECK(parse_category(to_string(category_of(s))) == category_of(s));
  }
}
