// Copyright 2026 The optsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "optsynth/augment.hpp"
#include "optsynth/complexity.hpp"
#include "optsynth/dataset.hpp"
#include "optsynth/lp_io.hpp"
#include "optsynth/model_json.hpp"
#include "sim_llm.hpp"

using namespace optsynth;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out, err;
  json summary() const { return json::parse(out); }
};

Result run_cli(const std::vector<std::string>& args, std::map<std::string, std::string> env = {}) {
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(args, out, err, [env](const std::string& name) -> std::optional<std::string> {
    auto it = env.find(name);
    if (it == env.end()) return std::nullopt;
    return it->second;
  });
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("optsynth_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
  return files;
}

}  // namespace

TEST_CASE("environment names") {
  CHECK(cli::env_name("seed") == "OPTSYNTH_SEED");
  CHECK(cli::env_name("solver.command") == "OPTSYNTH_SOLVER_COMMAND");
}

TEST_CASE("generate writes models and a manifest, reproducibly") {
  const auto a = fresh_dir("gen_a"), b = fresh_dir("gen_b");
  const auto r = run_cli({"generate", "bin_packing", "-n", "5", "--seed", "7", "-o", a.string()});
  REQUIRE(r.code == 0);
  CHECK(r.summary()["generated"] == 5);
  std::size_t lp = 0, js = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    lp += e.path().extension() == ".lp";
    js += e.path().extension() == ".json" && e.path().filename() != "manifest.json";
  }
  CHECK(lp == 5);
  CHECK(js == 5);
  const auto manifest = json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["seed"] == 7);
  CHECK(manifest["items"].size() == 5);
  REQUIRE(run_cli({"generate", "bin_packing", "-n", "5", "--seed", "7", "-o", b.string()}).code == 0);
  CHECK(dir_contents(a) == dir_contents(b));
}

TEST_CASE("usage and configuration errors exit 2 with a JSON summary") {
  const auto dir = fresh_dir("bad");
  SUBCASE("invalid parameter prints the schema") {
    const auto r = run_cli({"generate", "bin_packing", "-p", "n_items=[0,500]", "-o", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.summary()["ok"] == false);
    CHECK(r.err.find("parameters of bin_packing") != std::string::npos);
  }
  SUBCASE("unknown class") { CHECK(run_cli({"generate", "nope", "-o", dir.string()}).code == 2); }
  SUBCASE("unknown subcommand") {
    const auto r = run_cli({"frobnicate"});
    CHECK(r.code == 2);
    CHECK(r.summary()["exit_code"] == 2);
  }
  SUBCASE("missing argument") { CHECK(run_cli({"score"}).code == 2); }
  SUBCASE("API keys are refused outside the environment") {
    std::ofstream(dir / "cfg.txt") << "api_key = secret\n";
    CHECK(run_cli({"generate", "knapsack", "--config", (dir / "cfg.txt").string(), "-o", dir.string()}).code == 2);
  }
  SUBCASE("replay without fixtures") {
    CHECK(run_cli({"synthesize", "-i", dir.string(), "-o", dir.string()}).code == 2);
  }
}

TEST_CASE("settings precedence: flag, then environment, then file") {
  const auto dir = fresh_dir("prec");
  std::ofstream(dir / "cfg.txt") << "seed = 3\n";
  const auto cfg = (dir / "cfg.txt").string();
  auto seed_of = [&](std::vector<std::string> extra, std::map<std::string, std::string> env) {
    std::vector<std::string> args = {"generate", "knapsack", "-o", (dir / "out").string(), "--config", cfg};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = run_cli(args, env);
    REQUIRE(r.code == 0);
    return json::parse(slurp(dir / "out" / "manifest.json"))["seed"].get<int>();
  };
  CHECK(seed_of({}, {}) == 3);
  CHECK(seed_of({}, {{"OPTSYNTH_SEED", "5"}}) == 5);
  CHECK(seed_of({"--seed", "9"}, {{"OPTSYNTH_SEED", "5"}}) == 9);
  CHECK(run_cli({"generate", "knapsack", "-o", dir.string()}, {{"OPTSYNTH_SEED", "x"}}).code == 2);
}

TEST_CASE("score and solve agree with the library") {
  const auto dir = fresh_dir("score");
  REQUIRE(run_cli({"generate", "knapsack", "--seed", "4", "-o", dir.string()}).code == 0);
  const auto lp = dir / "knapsack_0000.lp";
  const auto pd = parse_lp(slurp(lp));
  const auto s = run_cli({"score", lp.string()});
  REQUIRE(s.code == 0);
  CHECK(s.summary()["score"].get<double>() == doctest::Approx(score(pd).score).epsilon(1e-12));
  const auto v = run_cli({"solve", (dir / "knapsack_0000.json").string(), "--solver", "builtin"});
  REQUIRE(v.code == 0);
  CHECK(v.summary()["status"] == "optimal");
  CHECK(v.summary()["objective"].get<double>() == doctest::Approx(*solve(pd, {}).objective));
  CHECK(run_cli({"solve", lp.string(), "--solver", "warp"}).code == 2);
}

TEST_CASE("tune with the rule-based advisor") {
  const auto dir = fresh_dir("tune");
  const auto r = run_cli({"tune", "bin_packing", "--seed", "1", "--time-max", "10", "--work-unit", "1e-6", "--log",
                          (dir / "log.jsonl").string(), "--out", (dir / "params.json").string()});
  REQUIRE(r.code == 0);
  CHECK(r.summary()["iterations"].get<int>() <= 5);
  CHECK(fs::exists(dir / "params.json"));
  CHECK(fs::exists(dir / "log.jsonl"));
  CHECK(run_cli({"tune", "bin_packing", "--complexity-min", "5000", "--complexity-max", "6000", "--iterations", "2",
                 "--work-unit", "1e-6"})
            .code == 1);
}

TEST_CASE("replayed pipeline through the command line") {
  const auto root = fresh_dir("pipeline");
  const auto models = root / "models", fixtures = root / "fixtures";
  REQUIRE(run_cli({"generate", "knapsack", "-n", "6", "--seed", "2", "-o", models.string()}).code == 0);
  REQUIRE(run_cli({"generate", "assignment", "-n", "6", "--seed", "2", "-o", models.string()}).code == 0);

  // Record fixtures with the simulated model through the library.
  {
    std::vector<SourceInstance> sources;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(models)) {
      if (e.path().extension() == ".json" && e.path().filename() != "manifest.json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto pd = problem_from_json_text(slurp(f));
      if (pd.name.empty()) pd.name = f.stem().string();
      sources.push_back(make_source(pd));
    }
    testing::SimLlm sim({.mismatch_rate = 0.3});
    GatewayOptions go;
    go.record_dir = fixtures;
    Gateway gw(sim.backend(), go);
    SynthesisOptions so;
    so.seed = 11;
    const auto run = synthesize_all(gw, sources, so);
    AugmentOptions ao;
    ao.seed = 11;
    augment_corpus(gw, run.accepted, augmentation_rules(), 2, ao);
  }

  const std::vector<std::string> replay = {"--backend", "replay", "--fixtures", fixtures.string(), "--seed", "11"};
  auto with = [&](std::vector<std::string> args) {
    args.insert(args.end(), replay.begin(), replay.end());
    return args;
  };
  for (const char* pass : {"p1", "p2"}) {
    const auto out = root / pass;
    const auto syn = run_cli(with({"synthesize", "-i", models.string(), "-o", (out / "syn").string()}));
    REQUIRE(syn.code == 0);
    CHECK(syn.summary()["total"] == 12);
    const auto aug = run_cli(with({"augment", "-i", (out / "syn" / "accepted.jsonl").string(), "-o",
                                   (out / "aug").string(), "--target", "2"}));
    REQUIRE(aug.code == 0);
    const auto train = run_cli({"build", "train", "--accepted", (out / "syn" / "accepted.jsonl").string(),
                                "--augmented", (out / "aug" / "augmented.jsonl").string(), "--rejected",
                                (out / "syn" / "rejected.jsonl").string(), "-o", (out / "train").string()});
    REQUIRE(train.code == 0);
    const auto bench = run_cli({"build", "bench", "--rejected", (out / "syn" / "rejected.jsonl").string(), "-o",
                                (out / "bench").string()});
    REQUIRE(bench.code == 0);
  }
  for (const char* sub : {"syn", "aug", "train", "bench"}) {
    CHECK(dir_contents(root / "p1" / sub) == dir_contents(root / "p2" / sub));
  }

  const auto bench = read_corpus(root / "p1" / "bench" / "corpus.jsonl");
  REQUIRE_FALSE(bench.empty());
  {
    std::ofstream preds(root / "preds.jsonl");
    for (std::size_t i = 0; i < bench.size(); ++i) {
      preds << json{{"id", bench[i].id}, {"prediction", i == 0 ? bench[i].ov + 5 : bench[i].ov}}.dump() << "\n";
    }
  }
  const auto g = run_cli({"grade", (root / "p1" / "bench" / "corpus.jsonl").string(), (root / "preds.jsonl").string()});
  REQUIRE(g.code == 0);
  CHECK(g.summary()["passed"] == bench.size() - 1);
  CHECK(g.summary()["total"] == bench.size());
}
