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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "optsynth/dataset.hpp"
#include "optsynth/errors.hpp"
#include "optsynth/generators.hpp"
#include "optsynth/lp_io.hpp"

using namespace optsynth;

namespace {

ProblemData knapsack22() { return build_knapsack({6, 10, 12}, {1, 2, 3}, 5); }

TripletRecord record(const std::string& id, const std::string& nl, Verdict verdict = Verdict::kAccepted,
                     const std::string& class_id = "knapsack", const std::string& tier = "easy") {
  TripletRecord t;
  t.id = id;
  t.nl = nl;
  t.source = knapsack22();
  t.source.name = id;
  t.ov = 22;
  t.class_id = class_id;
  t.tier = tier;
  t.scenario = "retail";
  t.verdict = verdict;
  if (verdict == Verdict::kAccepted) t.pd_prime = t.source;
  return t;
}

AugmentedCandidate candidate(const std::string& id, const std::string& nl) {
  AugmentedCandidate c;
  c.id = id;
  c.source_id = "r0";
  c.rule_id = "semantic_rephrase";
  c.nl_aug = nl;
  c.qualified = true;
  c.pd = knapsack22();
  c.ov = 22;
  c.class_id = "knapsack";
  return c;
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("optsynth_ds_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("training corpus merges, deduplicates and shuffles") {
  std::vector<TripletRecord> accepted;
  for (int i = 0; i < 10; ++i) accepted.push_back(record("r" + std::to_string(i), "text " + std::to_string(i)));
  std::vector<AugmentedCandidate> augmented;
  for (int i = 0; i < 5; ++i) augmented.push_back(candidate("r0/aug" + std::to_string(i), "aug " + std::to_string(i)));
  auto failed = candidate("r0/aug9", "never used");
  failed.qualified = false;
  augmented.push_back(failed);

  SUBCASE("no duplicates") {
    const auto b = build_train(accepted, augmented, {}, 5);
    CHECK(b.records.size() == 15);
    CHECK(b.duplicates == 0);
    CHECK(b.skipped.empty());
    CHECK(b.stats.acceptance_rate.value_or(0) == doctest::Approx(10.0 / 15.0));
  }
  SUBCASE("identical descriptions keep one record") {
    accepted[3].nl = accepted[2].nl;
    augmented[1].nl_aug = accepted[2].nl;
    const auto b = build_train(accepted, augmented);
    CHECK(b.records.size() == 13);
    CHECK(b.duplicates == 2);
  }
  SUBCASE("invalid records are skipped and listed") {
    accepted[4].ov.reset();
    accepted[5].verdict = Verdict::kRejected;
    const auto b = build_train(accepted, augmented);
    CHECK(b.records.size() == 13);
    REQUIRE(b.skipped.size() == 2);
    CHECK(b.skipped[0].rfind("r4:", 0) == 0);
  }
  SUBCASE("the shuffle depends only on the seed") {
    TrainOptions a, c;
    a.seed = c.seed = 77;
    const auto x = build_train(accepted, augmented, a);
    const auto y = build_train(accepted, augmented, c);
    for (std::size_t i = 0; i < x.records.size(); ++i) CHECK(x.records[i].to_json() == y.records[i].to_json());
    TrainOptions other;
    other.seed = 78;
    const auto z = build_train(accepted, augmented, other);
    bool differs = false;
    for (std::size_t i = 0; i < x.records.size(); ++i) differs = differs || x.records[i].id != z.records[i].id;
    CHECK(differs);
  }
}

TEST_CASE("statistics match an independent recount") {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> len(0, 9000), pick(0, 4);
  const std::vector<std::string> tiers = {"easy", "medium", "hard", "none", "medium_easy"};
  const std::vector<std::string> classes = {"knapsack", "diet", "tsp_mtz", "set_cover", "assignment"};
  std::vector<CorpusRecord> records(300);
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].id = std::to_string(i);
    records[i].nl = std::string(static_cast<std::size_t>(len(gen)), 'x');
    records[i].pd_lp = std::string(static_cast<std::size_t>(len(gen)), 'y');
    records[i].tier = tiers[static_cast<std::size_t>(pick(gen))];
    records[i].class_id = classes[static_cast<std::size_t>(pick(gen))];
    records[i].scenario = "energy";
  }
  const auto s = compute_stats(records);
  const std::vector<std::size_t> edges = {0, 250, 500, 1000, 1500, 2000, 3000, 4000, 6000, 8000};
  REQUIRE(s.nl_length.edges == edges);
  for (std::size_t b = 0; b < edges.size(); ++b) {
    const std::size_t lo = edges[b];
    const std::size_t hi = b + 1 < edges.size() ? edges[b + 1] : SIZE_MAX;
    std::size_t nl = 0, lp = 0;
    for (const auto& r : records) {
      nl += r.nl.size() >= lo && r.nl.size() < hi;
      lp += r.pd_lp.size() >= lo && r.pd_lp.size() < hi;
    }
    CHECK(s.nl_length.counts[b] == nl);
    CHECK(s.lp_length.counts[b] == lp);
  }
  std::size_t by_tier = 0, by_class = 0;
  for (const auto& [k, v] : s.per_tier) by_tier += v;
  for (const auto& [k, v] : s.per_class) by_class += v;
  CHECK(s.nl_length.total() == 300);
  CHECK(by_tier == 300);
  CHECK(by_class == 300);
  CHECK(s.per_scenario.at("energy") == 300);
  CHECK(s.to_text().find("records\t300") != std::string::npos);
  CHECK_THROWS_AS(Histogram({5, 10}), ConfigError);
  CHECK_THROWS_AS(Histogram({0, 10, 10}), ConfigError);
}

TEST_CASE("corpus files round trip") {
  const auto b = build_train({record("a", "alpha"), record("b", "beta")}, {}, {}, 2);
  const auto dir = fresh_dir("corpus");
  write_corpus(dir, b.records, b.stats, {{"seed", 0}});
  CHECK(std::filesystem::exists(dir / "stats.txt"));
  const auto stats = nlohmann::json::parse(std::ifstream(dir / "stats.json"));
  CHECK(stats["record_count"] == 2);
  CHECK(stats["seed"] == 0);
  const auto back = read_corpus(dir / "corpus.jsonl");
  REQUIRE(back.size() == 2);
  CHECK(back[0].to_json() == b.records[0].to_json());
  const auto j = back[0].to_json();
  for (const char* key : {"id", "nl", "mf", "pd_lp", "pd_json", "ov", "class_id", "tier", "scenario"}) {
    CHECK(j.contains(key));
  }
  CHECK_FALSE(j.contains("ov_relaxed"));
}

TEST_CASE("problem types and relaxation") {
  CHECK(problem_type(knapsack22()) == "IP");
  CHECK(problem_type(relax_integrality(knapsack22())) == "LP");
  CHECK(problem_type(generate({"capacitated_facility_location", {}, 1})) == "MILP");
  CHECK(problem_type(generate({"portfolio_qp", {}, 1})) == "QP");
  const auto relaxed = solve(relax_integrality(knapsack22()), {});
  REQUIRE(relaxed.optimal());
  CHECK(*relaxed.objective == doctest::Approx(24.0));  // 6 + 10 + (2/3) * 12
}

TEST_CASE("benchmark selection") {
  std::vector<TripletRecord> rejected;
  for (int i = 0; i < 12; ++i) {
    auto t = record("x" + std::to_string(i), std::string(static_cast<std::size_t>(100 * (i + 1)), 'n'),
                    Verdict::kRejected, i % 2 ? "knapsack" : "diet", i < 6 ? "easy" : "medium");
    t.source.constraints.front().rhs = 5 + i;  // distinct sources
    t.ov = solve(t.source, {}).objective;
    rejected.push_back(t);
  }
  SUBCASE("minimum description length") {
    BenchSelection sel;
    sel.min_nl_length = 700;
    const auto b = build_bench(rejected, sel);
    std::size_t expected = 0;
    for (const auto& t : rejected) expected += t.nl.size() >= 700;
    CHECK(b.records.size() == expected);
    for (const auto& r : b.records) CHECK(r.nl.size() >= 700);
    CHECK(b.dropped.at("too-short") == rejected.size() - expected);
  }
  SUBCASE("tier floor and class quota") {
    BenchSelection sel;
    sel.tier_floor = "medium";
    CHECK(build_bench(rejected, sel).records.size() == 6);
    sel.tier_floor.clear();
    sel.class_quota = 2;
    CHECK(build_bench(rejected, sel).records.size() == 4);
    sel.tier_floor = "legendary";
    CHECK_THROWS_AS(build_bench(rejected, sel), ConfigError);
  }
  SUBCASE("duplicate sources give one entry") {
    auto twin = rejected[0];
    twin.id = "twin";
    rejected.push_back(twin);
    const auto b = build_bench(rejected, {});
    CHECK(b.records.size() == 12);
    CHECK(b.dropped.at("duplicate-source") == 1);
  }
  SUBCASE("include and exclude lists") {
    BenchSelection sel;
    sel.include = {"x1", "x2", "x3"};
    sel.exclude = {"x2"};
    const auto b = build_bench(rejected, sel);
    REQUIRE(b.records.size() == 2);
    CHECK(b.records[0].id == "x1");
    CHECK(b.records[1].id == "x3");
  }
  SUBCASE("records without ground truth are dropped") {
    rejected[0].ov.reset();
    CHECK(build_bench(rejected, {}).dropped.at("no-ground-truth") == 1);
  }
  SUBCASE("coverage gaps and relaxed values") {
    BenchSelection sel;
    sel.coverage = {"IP", "QP"};
    const auto b = build_bench(rejected, sel);
    CHECK(b.type_counts.at("IP") == 12);
    CHECK(b.missing_types == std::vector<std::string>{"QP"});
    CHECK(b.report()["missing_types"][0] == "QP");
    for (const auto& r : b.records) {
      REQUIRE(r.ov_relaxed);
      CHECK(*r.ov_relaxed >= r.ov - 1e-9);
    }
  }
  SUBCASE("empty selection warns") {
    BenchSelection sel;
    sel.min_nl_length = 1000000;
    const auto b = build_bench(rejected, sel);
    CHECK(b.records.empty());
    CHECK_FALSE(b.warnings.empty());
  }
}

TEST_CASE("grading") {
  std::vector<CorpusRecord> bench(10);
  std::map<std::string, double> exact, half;
  for (int i = 0; i < 10; ++i) {
    auto& r = bench[static_cast<std::size_t>(i)];
    r.id = "b" + std::to_string(i);
    r.ov = 100.0 * i - 250.0;
    exact[r.id] = r.ov;
    half[r.id] = i % 2 ? r.ov * (1 + 1e-3) + 1e-3 : r.ov;
  }
  CHECK(grade(bench, exact).accuracy() == 1.0);
  const auto g = grade(bench, half);
  CHECK(g.accuracy() == doctest::Approx(0.5));
  CHECK(g.failed.size() == 5);

  SUBCASE("relaxed optimum is accepted") {
    bench[0].ov_relaxed = 12.5;
    exact[bench[0].id] = 12.5;
    CHECK(grade(bench, exact).passed == 10);
  }
  SUBCASE("missing and unknown predictions") {
    exact.erase("b3");
    exact["zz"] = 1;
    const auto m = grade(bench, exact);
    CHECK(m.passed == 9);
    CHECK(m.missing == std::vector<std::string>{"b3"});
    CHECK(m.unknown == std::vector<std::string>{"zz"});
  }
  SUBCASE("order independent and equal to values_match") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> noise(-2e-6, 2e-6);
    std::map<std::string, double> preds;
    std::size_t expected = 0;
    for (const auto& r : bench) {
      preds[r.id] = r.ov + noise(gen) * (std::abs(r.ov) + 1);
      expected += values_match(preds[r.id], r.ov, 1e-6);
    }
    const auto a = grade(bench, preds);
    std::shuffle(bench.begin(), bench.end(), gen);
    const auto b = grade(bench, preds);
    CHECK(a.passed == expected);
    CHECK(b.passed == expected);
  }
}

TEST_CASE("prediction files") {
  const auto dir = fresh_dir("preds");
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "a.jsonl") << "{\"id\": \"p1\", \"prediction\": 3.5}\n\n{\"id\": \"p2\", \"prediction\": -1}\n";
    std::ofstream(dir / "b.json") << "{\"p1\": 3.5, \"p2\": -1}";
    std::ofstream(dir / "c.jsonl") << "{\"id\": \"p1\", \"prediction\": \"x\"}\n";
  }
  const std::map<std::string, double> expected = {{"p1", 3.5}, {"p2", -1}};
  CHECK(read_predictions(dir / "a.jsonl") == expected);
  CHECK(read_predictions(dir / "b.json") == expected);
  CHECK_THROWS_AS(read_predictions(dir / "c.jsonl"), ParseError);
}
