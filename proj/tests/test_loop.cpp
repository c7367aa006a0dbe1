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

#include <filesystem>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "doctest.h"
#include "json.hpp"
#include "mrl/annotation.hpp"
#include "mrl/common.hpp"
#include "mrl/lexicon.hpp"
#include "mrl/loop.hpp"
#include "mrl/synthetic.hpp"
#include "support.hpp"

using namespace mrl;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  SentimentCorpus data;
  Corpus corpus;
  Vocabulary vocab;
  EncoderModel<float> encoder;
  RuleLemmatizer lemmatizer{MorphRuleTable{}};
};

const Fixture& fixture() {
  static const Fixture f = [] {
    SentimentCorpusOptions o;
    o.num_documents = 160;
    o.seed = 1;
    Fixture x{generate_sentiment_corpus(o), {}, {}, {}, RuleLemmatizer{MorphRuleTable{}}};
    x.corpus = split_dataset(x.data.corpus, 7);
    x.lemmatizer = RuleLemmatizer(x.data.rules);
    x.vocab = train_morpheme_vocab(x.corpus, x.data.rules, 300);
    EncoderConfig c;
    c.num_layers = 1;
    c.num_heads = 2;
    c.model_dim = 16;
    c.ffn_dim = 32;
    c.max_seq_len = 32;
    c.vocab_size = x.vocab.size();
    x.encoder = init_encoder<float>(c, 3);
    return x;
  }();
  return f;
}

LoopConfig quick_config() {
  LoopConfig c;
  c.k = 5;
  c.max_iterations = 2;
  c.convergence_epsilon = 0.0;
  c.train.epochs = 2;
  c.train.learning_rate = 3e-3;
  c.train.batch_size = 16;
  c.seed = 4;
  return c;
}

std::string slurp_tree(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string out;
  for (const auto& f : files) out += fs::relative(f, root).string() + "\n" + read_file(f.string());
  return out;
}

}  // namespace

TEST_CASE("synthetic oracle ratings do not depend on batching") {
  const auto& f = fixture();
  SyntheticOracle a(f.corpus, {.seed = 3});
  SyntheticOracle b(f.corpus, {.flip_rate = 0.0, .raters_per_comment = 3, .batch_size = 1, .seed = 3});
  const std::vector<std::string> ids{f.corpus.documents[0].id, f.corpus.documents[1].id};
  const auto ra = a.annotate(ids);
  const auto rb = b.annotate(std::span(ids).subspan(1));
  std::multiset<std::tuple<std::string, int, int>> sa, sb;
  for (const auto& r : ra) {
    if (r.comment_id == ids[1]) sa.emplace(r.comment_id, static_cast<int>(r.sentiment), r.raw_rating);
    // Noiseless raters reproduce the planted label.
    CHECK(coarsen(r) == f.corpus.find(r.comment_id)->labels.at(std::string(to_string(r.sentiment))));
  }
  for (const auto& r : rb) sb.emplace(r.comment_id, static_cast<int>(r.sentiment), r.raw_rating);
  CHECK(sa == sb);
  CHECK(ra.size() == 2 * kNumSentiments * 3);
  CHECK_THROWS_AS(a.annotate(std::vector<std::string>{"nope"}), Error);
}

TEST_CASE("recorded oracle replays and fails on unknown comments") {
  RecordedOracle o({{"c1", "r1", Sentiment::kJoy, 2}, {"c1", "r2", Sentiment::kJoy, 1}});
  CHECK(o.annotate(std::vector<std::string>{"c1"}).size() == 2);
  try {
    o.annotate(std::vector<std::string>{"c2"});
    FAIL("expected oracle failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOracleFailure);
  }
}

TEST_CASE("loop config json round trips") {
  LoopConfig c = quick_config();
  c.convergence_epsilon = std::numeric_limits<double>::infinity();
  const auto back = loop_config_from_json(loop_config_to_json(c));
  CHECK(back.k == c.k);
  CHECK(std::isinf(back.convergence_epsilon));
  CHECK(back.train.learning_rate == c.train.learning_rate);
  c.k = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("loop writes its state layout and never reselects a comment") {
  const auto& f = fixture();
  testing::TempDir dir;
  SyntheticOracle oracle(f.corpus, {.seed = 2});
  const LoopInputs in{f.corpus, f.data.lexicon, f.lemmatizer, f.encoder, f.vocab, oracle};
  const LoopState s = run_loop(in, quick_config(), dir.file("loop"));
  CHECK(s.status == "max_iterations");
  CHECK(s.iteration == 2);
  REQUIRE(s.history.size() == 2);
  CHECK(s.history[0].score_source == "lexicon");
  CHECK(s.history[1].score_source == "classifier");
  CHECK(s.history[0].pre_dedup == 90);
  for (const char* p : {"state.json", "validation/ratings.csv", "iter_000/selection.json", "iter_001/labeled_pool.csv",
                        "iter_001/checkpoints/polarity.ckpt", "iter_001/manifest.json", "iter_001/metrics.json"}) {
    CHECK_MESSAGE(fs::exists(dir.path() / "loop" / p), p);
  }
  std::set<std::string> selected;
  for (int it = 0; it < 2; ++it) {
    const auto j = nlohmann::json::parse(read_file(dir.file(fmt::format("loop/iter_{:03d}/selection.json", it))));
    for (const auto& id : j.at("ids")) CHECK(selected.insert(id.get<std::string>()).second);
  }
  for (const auto& id : selected) CHECK(f.corpus.find(id)->split == Split::kTrain);
  CHECK_THROWS_AS(run_loop(in, quick_config(), dir.file("loop")), Error);
  CHECK(load_loop_state(dir.file("loop")).history.size() == 2);
}

TEST_CASE("an infinite tolerance converges after one iteration") {
  const auto& f = fixture();
  testing::TempDir dir;
  SyntheticOracle oracle(f.corpus, {.seed = 2});
  LoopConfig c = quick_config();
  c.convergence_epsilon = std::numeric_limits<double>::infinity();
  const LoopState s = run_loop({f.corpus, f.data.lexicon, f.lemmatizer, f.encoder, f.vocab, oracle}, c, dir.file("loop"));
  CHECK(s.status == "converged");
  CHECK(s.iteration == 1);
}

TEST_CASE("resuming after an oracle failure reproduces the uninterrupted run") {
  const auto& f = fixture();
  testing::TempDir a, b;
  SyntheticOracle steady(f.corpus, {.seed = 2});
  run_loop({f.corpus, f.data.lexicon, f.lemmatizer, f.encoder, f.vocab, steady}, quick_config(), a.file("loop"));

  // Call 0 rates validation, call 1 iteration 0, call 2 iteration 1.
  SyntheticOracle flaky(f.corpus, {.seed = 2, .fail_on_call = 2});
  try {
    run_loop({f.corpus, f.data.lexicon, f.lemmatizer, f.encoder, f.vocab, flaky}, quick_config(), b.file("loop"));
    FAIL("expected oracle failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOracleFailure);
  }
  const LoopState saved = load_loop_state(b.file("loop"));
  CHECK(saved.status == "oracle_failure");
  CHECK(saved.iteration == 1);
  SyntheticOracle fresh(f.corpus, {.seed = 2});
  const LoopState done = resume_loop({f.corpus, f.data.lexicon, f.lemmatizer, f.encoder, f.vocab, fresh}, b.file("loop"));
  CHECK(done.status == "max_iterations");
  CHECK(slurp_tree(a.path()) == slurp_tree(b.path()));
}
