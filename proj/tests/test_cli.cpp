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

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "doctest.h"
#include "json.hpp"
#include "mrl/common.hpp"
#include "support.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status = -1;
  std::string output;  // stdout and stderr
};

Outcome cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + MRL_CLI_PATH + "' " + args + " 2>&1";
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return o;
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) o.output.append(buf.data(), n);
  const int raw = pclose(pipe);
  o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return o;
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

json load(const fs::path& p) { return json::parse(mrl::read_file(p.string())); }

// Synthetic data and lexicon scores shared by the tests below.
struct Workspace {
  mrl::testing::TempDir dir;
  bool ready = false;
  std::string out() const { return "--out-dir " + quoted(dir.path()); }
};

const Workspace& workspace() {
  static Workspace ws;
  static const bool done = [] {
    ws.ready = cli("synth --output data --seed 3 --set sentiment.num_documents=240 " + ws.out()).status == 0 &&
               cli("lexicon-score --corpus data/sentiment.jsonl --lexicon data/lexicon.tsv "
                   "--rules data/sentiment_rules.tsv --output scores.csv " + ws.out())
                       .status == 0;
    return true;
  }();
  (void)done;
  return ws;
}

}  // namespace

TEST_CASE("usage errors and failures exit nonzero") {
  CHECK(cli("--help").status == 0);
  CHECK(cli("").status != 0);
  CHECK(cli("teleport").status != 0);
  mrl::testing::TempDir dir;
  const Outcome missing = cli("correlation --pool nowhere.csv --output c.json --out-dir " + quoted(dir.path()));
  CHECK(missing.status == 1);
  CHECK(missing.output.find("error:") != std::string::npos);
  CHECK(missing.output.find("nowhere.csv") != std::string::npos);
  CHECK(cli("select --scores x.csv --k notanumber --out-dir " + quoted(dir.path())).status != 0);
}

TEST_CASE("a stage command prints its summary and writes stamped output") {
  const auto& ws = workspace();
  REQUIRE(ws.ready);
  const Outcome o = cli("select --scores scores.csv --k 4 --output sel4.json " + ws.out());
  REQUIRE(o.status == 0);
  const json summary = json::parse(o.output);
  CHECK(summary.contains("outputs"));
  const json sel = load(ws.dir.path() / "sel4.json");
  CHECK(sel.at("pre_dedup_count") == 2 * 4 * 9);
  CHECK(sel.contains("stamp"));
}

TEST_CASE("flags override manifest values, which override defaults") {
  const auto& ws = workspace();
  REQUIRE(ws.ready);
  const fs::path manifest = ws.dir.path() / "m.json";
  mrl::write_file(manifest.string(), R"({"name": "m", "output_dir": ".", "stages": [
      {"stage": "select", "scores": "scores.csv", "k": 6, "output": "from_manifest.json"}]})");
  const std::string base = "select --manifest " + quoted(manifest) + " " + ws.out();
  REQUIRE(cli(base).status == 0);
  CHECK(load(ws.dir.path() / "from_manifest.json").at("pre_dedup_count") == 2 * 6 * 9);
  REQUIRE(cli(base + " --k 2 --output flag.json").status == 0);
  CHECK(load(ws.dir.path() / "flag.json").at("pre_dedup_count") == 2 * 2 * 9);
  REQUIRE(cli(base + " --set k=3 --set output=\"set.json\"").status == 0);
  CHECK(load(ws.dir.path() / "set.json").at("pre_dedup_count") == 2 * 3 * 9);
}

TEST_CASE("run honours MRL_OUTPUT_ROOT and --output-root") {
  mrl::testing::TempDir root;
  const fs::path manifest = root.path() / "tiny.json";
  mrl::write_file(manifest.string(), R"({"name": "tiny", "output_dir": "out", "seeds": {"default": 2}, "stages": [
      {"stage": "synth", "output": "data", "sentiment": {"num_documents": 60}},
      {"stage": "lexicon", "corpus": "data/sentiment.jsonl", "lexicon": "data/lexicon.tsv", "output": "scores.csv"},
      {"stage": "select", "scores": "scores.csv", "k": 2, "output": "sel.json"}]})");
  const fs::path env_root = root.path() / "env";
  const Outcome o = cli("run " + quoted(manifest), "MRL_OUTPUT_ROOT=" + quoted(env_root));
  REQUIRE_MESSAGE(o.status == 0, o.output);
  CHECK(fs::exists(env_root / "out" / "sel.json"));
  CHECK(load(env_root / "out" / "run.json").at("stages").size() == 3);

  const fs::path flag_root = root.path() / "flag";
  REQUIRE(cli("run " + quoted(manifest) + " --output-root " + quoted(flag_root), "MRL_OUTPUT_ROOT=" + quoted(env_root)).status == 0);
  CHECK(mrl::read_file((flag_root / "out" / "sel.json").string()) == mrl::read_file((env_root / "out" / "sel.json").string()));

  // A failing stage makes the whole run exit nonzero.
  mrl::write_file(manifest.string(), R"({"name": "bad", "output_dir": "out", "stages": [
      {"stage": "correlation", "pool": "absent.csv", "output": "c.json"}]})");
  CHECK(cli("run " + quoted(manifest) + " --output-root " + quoted(flag_root)).status != 0);
}

TEST_CASE("loop run stops on oracle failure and resumes") {
  const auto& ws = workspace();
  REQUIRE(ws.ready);
  REQUIRE(cli("train-tokenizer --corpus data/sentiment.jsonl --scheme morpheme --size 250 --rules data/sentiment_rules.tsv "
              "--output loop_vocab.txt " + ws.out())
              .status == 0);
  const std::string args =
      "loop run --corpus data/sentiment.jsonl --lexicon data/lexicon.tsv --rules data/sentiment_rules.tsv "
      "--vocab loop_vocab.txt --k 4 --max-iterations 2 --epsilon 0 --output loop "
      "--set 'encoder={\"num_layers\":1,\"num_heads\":2,\"model_dim\":16,\"ffn_dim\":32,\"max_seq_len\":32}' "
      "--set 'train={\"epochs\":2,\"learning_rate\":0.003,\"batch_size\":16}' --set oracle.fail_on_call=2 " +
      ws.out();
  const Outcome failed = cli(args);
  CHECK(failed.status == 1);
  CHECK(failed.output.find("oracle") != std::string::npos);
  CHECK(load(ws.dir.path() / "loop" / "state.json").at("status") == "oracle_failure");
  CHECK(cli(args).status == 1);  // the directory already holds a loop

  const Outcome resumed = cli("loop resume " + quoted(ws.dir.path() / "loop"));
  REQUIRE_MESSAGE(resumed.status == 0, resumed.output);
  const json loop = load(ws.dir.path() / "loop" / "loop.json");
  CHECK(loop.at("status") == "max_iterations");
  CHECK(loop.at("iterations") == 2);
}

TEST_CASE("the smoke manifest runs end to end") {
  mrl::testing::TempDir root;
  const Outcome o = cli("run " + quoted(fs::path(MRL_SOURCE_DIR) / "configs" / "smoke.json") + " --output-root " + quoted(root.path()));
  REQUIRE_MESSAGE(o.status == 0, o.output);
  const json run = load(root.path() / "runs" / "smoke" / "run.json");
  for (const auto& st : run.at("stages")) CHECK_MESSAGE(st.at("status") == "ok", st.dump());
  CHECK(fs::exists(root.path() / "runs" / "smoke" / "report" / "summary.json"));
}
