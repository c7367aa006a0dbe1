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

#include <algorithm>
#include <filesystem>

#include "doctest.h"
#include "json.hpp"
#include "mrl/common.hpp"
#include "mrl/manifest.hpp"
#include "mrl/pipeline.hpp"
#include "support.hpp"

using namespace mrl;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<fs::path> files_under(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// The smoke manifest run twice into separate roots.
struct SmokeRuns {
  testing::TempDir a, b;
  RunResult first, second;
  fs::path dir_a() const { return fs::path(first.output_dir); }
  fs::path dir_b() const { return fs::path(second.output_dir); }
};

const SmokeRuns& smoke() {
  static SmokeRuns runs;
  static const bool done = [] {
    const auto m = load_manifest(std::string(MRL_SOURCE_DIR) + "/configs/smoke.json");
    runs.first = run_manifest(m, runs.a.path().string());
    runs.second = run_manifest(m, runs.b.path().string());
    return true;
  }();
  (void)done;
  return runs;
}

json load_json(const fs::path& p) { return json::parse(read_file(p.string())); }

}  // namespace

TEST_CASE("manifest parsing, digest and placeholders") {
  const std::string text = R"({"name": "t", "output_dir": "{manifest_dir}/out", "seeds": {"default": 3, "b": 9},
    "stages": [{"stage": "synth", "output": "data"}, {"stage": "lexicon", "id": "b", "corpus": "x"}]})";
  const auto m = parse_manifest(text, "/tmp/cfg");
  CHECK(m.output_dir == "/tmp/cfg/out");
  REQUIRE(m.stages.size() == 2);
  CHECK(m.stages[0].id == "synth");
  CHECK(m.stages[1].params.at("corpus") == "x");
  CHECK(m.seed_for("b") == 9);
  CHECK(m.seed_for("synth") == 3);
  CHECK(m.digest.size() == 64);

  // Key order and whitespace do not change the digest; content does.
  const std::string reordered = R"({"stages": [{"output": "data", "stage": "synth"}, {"corpus": "x", "id": "b", "stage": "lexicon"}],
    "seeds": {"b": 9, "default": 3}, "output_dir": "{manifest_dir}/out", "name": "t"})";
  CHECK(parse_manifest(reordered, "/elsewhere").digest == m.digest);
  std::string changed = text;
  changed.replace(changed.find("\"x\""), 3, "\"y\"");
  CHECK(parse_manifest(changed, "/tmp/cfg").digest != m.digest);
  CHECK_THROWS_AS(parse_manifest("{not json", "."), Error);
}

TEST_CASE("manifest validation rejects bad stage graphs") {
  const auto bad = [](const std::string& stages) {
    const auto text = R"({"name": "t", "output_dir": "o", "stages": )" + stages + "}";
    try {
      validate_manifest(parse_manifest(text, "."));
    } catch (const Error&) {
      return true;
    }
    return false;
  };
  CHECK(bad(R"([{"stage": "teleport"}])"));
  CHECK(bad(R"([{"stage": "select", "id": "s", "scores": "a", "output": "b"}, {"stage": "select", "id": "s", "scores": "a", "output": "c"}])"));
  CHECK(bad(R"([{"stage": "select", "scores": "scores.csv", "output": "sel.json"},
                {"stage": "lexicon", "corpus": "c.jsonl", "lexicon": "l.tsv", "output": "scores.csv"}])"));
  CHECK(bad(R"([{"stage": "compare", "pretrain": ["a.jsonl", "late.jsonl"], "test": "t.jsonl", "output": "c.csv"},
                {"stage": "ingest", "input": "raw.jsonl", "output": "late.jsonl"}])"));
  CHECK_FALSE(bad(R"([{"stage": "lexicon", "corpus": "c.jsonl", "lexicon": "l.tsv", "output": "scores.csv"},
                      {"stage": "select", "scores": "scores.csv", "output": "sel.json"}])"));
}

TEST_CASE("a failing stage skips the rest and records the run") {
  testing::TempDir root;
  const auto m = parse_manifest(R"({"name": "f", "output_dir": "o", "stages": [
      {"stage": "correlation", "pool": "missing.csv", "output": "c.json"},
      {"stage": "report", "dir": ".", "output": "report"}]})",
                                ".");
  const RunResult r = run_manifest(m, root.path().string());
  CHECK_FALSE(r.ok());
  REQUIRE(r.stages.size() == 2);
  CHECK(r.stages[0].status == "failed");
  CHECK(r.stages[0].error.find("missing.csv") != std::string::npos);
  CHECK(r.stages[1].status == "skipped");
  const json run = load_json(root.path() / "o" / "run.json");
  CHECK(run.at("stages").at(1).at("status") == "skipped");
  CHECK(fs::exists(root.path() / "o" / "manifest.json"));
}

TEST_CASE("a filtered run only executes the selected stage type") {
  testing::TempDir root;
  const auto m = parse_manifest(R"({"name": "f", "output_dir": "o", "stages": [
      {"stage": "synth", "output": "data", "sentiment": {"num_documents": 40}},
      {"stage": "correlation", "pool": "data/plutchik_pool.csv", "output": "c.json"}]})",
                                ".");
  REQUIRE(run_manifest(m, root.path().string()).ok());
  fs::remove(root.path() / "o" / "c.json");
  const RunResult r = run_manifest(m, root.path().string(), "correlation");
  CHECK(r.ok());
  CHECK(r.stages[0].status == "not_selected");
  CHECK(r.stages[1].status == "ok");
  CHECK(fs::exists(root.path() / "o" / "c.json"));
  CHECK(build_report((root.path() / "o").string()).summary.at("absent").empty());
}

TEST_CASE("report over an empty directory warns") {
  testing::TempDir dir;
  const Report r = build_report(dir.path().string());
  REQUIRE(r.summary.at("warnings").is_array());
  CHECK(r.summary.at("warnings").size() >= 1);
  CHECK(r.summary.at("artifacts").empty());
}

TEST_CASE("smoke manifest runs every stage") {
  const auto& s = smoke();
  for (const auto& st : s.first.stages) CHECK_MESSAGE(st.status == "ok", st.id, ": ", st.error);
  CHECK(s.first.ok());
}

TEST_CASE("reruns of a manifest are byte-identical") {
  const auto& s = smoke();
  const auto fa = files_under(s.dir_a());
  REQUIRE(fa == files_under(s.dir_b()));
  CHECK(fa.size() > 40);
  for (const auto& f : fa) {
    CHECK_MESSAGE(read_file((s.dir_a() / f).string()) == read_file((s.dir_b() / f).string()), f.string());
  }
}

TEST_CASE("every artifact carries the manifest stamp") {
  const auto& s = smoke();
  const auto m = load_manifest(std::string(MRL_SOURCE_DIR) + "/configs/smoke.json");
  const std::string digest_line = "# manifest_digest=" + m.digest;
  for (const auto& f : files_under(s.dir_a())) {
    const std::string body = read_file((s.dir_a() / f).string());
    const std::string ext = f.extension().string();
    if (f == "manifest.json") {
      // The echoed manifest is the thing the digest is computed from.
      CHECK(sha256_hex(json::parse(body).dump()) == m.digest);
    } else if (ext == ".json") {
      const json j = json::parse(body);
      CHECK_MESSAGE(j.contains("stamp"), f.string());
      if (j.contains("stamp")) {
        CHECK(j["stamp"]["manifest_digest"] == m.digest);
        CHECK(j["stamp"]["format_version"] == 1);
      }
    } else if (ext == ".csv" || ext == ".txt") {
      CHECK_MESSAGE(body.starts_with(digest_line), f.string());
    } else if (ext == ".ckpt") {
      CHECK_MESSAGE(body.find(m.digest) != std::string::npos, f.string());
    }
  }
  // Plain data files are stamped through the summary of the stage that wrote them.
  const json synth = load_json(s.dir_a() / "data" / "synth.json");
  CHECK(synth["stamp"]["manifest_digest"] == m.digest);
}

TEST_CASE("report numbers are copied from stage outputs") {
  const auto& s = smoke();
  const json summary = load_json(s.dir_a() / "report" / "summary.json");
  const json metrics = load_json(s.dir_a() / "polarity_metrics.json");
  const json& reported = summary.at("metrics").at("polarity_metrics.json");
  CHECK(reported.at("accuracy") == metrics.at("accuracy"));
  CHECK(reported.at("per_class") == metrics.at("per_class"));
  const json loop = load_json(s.dir_a() / "loop" / "loop.json");
  CHECK(summary.at("loop").at("loop/loop.json").at("final_mean_f1") == loop.at("final_mean_f1"));
  const json boot = load_json(s.dir_a() / "bootstrap.json");
  CHECK(summary.at("bootstrap").at("bootstrap.json").at("accuracy").at("mean") == boot.at("summary").at("accuracy").at("mean"));
  CHECK(summary.at("absent").empty());
  const json sel = summary.at("selection").at("selection.json");
  CHECK(sel.at("selected_count").get<int>() <= sel.at("pre_dedup_count").get<int>());
  CHECK(sel.at("pre_dedup_count") == 2 * 10 * 9);
}

TEST_CASE("comparison has one row per arm") {
  const auto& s = smoke();
  const auto lines = split(read_file((s.dir_a() / "comparison.csv").string()), '\n');
  std::vector<std::string> rows;
  for (const auto& l : lines) {
    if (!l.empty() && !l.starts_with("#")) rows.push_back(l);
  }
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == "arm,scheme,pseudo_perplexity,oov_pct,ner_f1,pos_f1,polarity_f1");
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].find("FAILED") == std::string::npos);

  const json base = {{"pretrain", "data/mrl_train.jsonl"}, {"test", "data/mrl_test.jsonl"}, {"rules", "data/rules.tsv"},
                     {"encoder", {{"num_layers", 1}, {"num_heads", 2}, {"model_dim", 16}, {"ffn_dim", 32}, {"max_seq_len", 48}}},
                     {"mlm", {{"epochs", 1}, {"learning_rate", 0.003}, {"batch_size", 16}}},
                     {"pp_sentences", 3}};
  const StageContext ctx{s.dir_a().string(), "", 5};
  json one = base;
  one["arms"] = json::array({{{"name", "m"}, {"scheme", "morpheme"}, {"size", 200}}});
  const auto single = run_comparison(one, ctx);
  REQUIRE(single.size() == 1);
  CHECK(single[0].pseudo_perplexity.has_value());
  CHECK(single[0].oov_rate.has_value());
  CHECK_FALSE(single[0].pos_f1.has_value());
  const auto csv = comparison_to_csv(single);
  CHECK(split(csv, '\n').size() == 3);  // header, row, trailing empty
  CHECK(csv.find(",NA,") != std::string::npos);

  json listed = one;
  listed["pretrain"] = json::array({"data/mrl_train.jsonl", "data/sentiment.jsonl"});
  listed["rules"] = json::array({"data/rules.tsv", "data/sentiment_rules.tsv"});
  const auto merged = run_comparison(listed, ctx);
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].errors.empty());
  listed["pretrain"] = json::array({"data/mrl_train.jsonl", "data/absent.jsonl"});
  CHECK_THROWS_AS(run_comparison(listed, ctx), Error);

  json broken = base;
  broken["arms"] = json::array({{{"name", "bad"}, {"scheme", "runes"}}, {{"name", "c"}, {"scheme", "char"}}});
  const auto rows2 = run_comparison(broken, ctx);
  REQUIRE(rows2.size() == 2);
  CHECK(rows2[0].errors.count("pseudo_perplexity") == 1);
  CHECK(comparison_to_csv(rows2).find("bad,runes,FAILED") != std::string::npos);
  CHECK(rows2[1].errors.empty());
}
