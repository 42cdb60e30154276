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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "optsynth/errors.hpp"
#include "optsynth/generators.hpp"
#include "optsynth/lp_io.hpp"
#include "optsynth/model_json.hpp"
#include "optsynth/synthesis.hpp"
#include "sim_llm.hpp"

using namespace optsynth;
using optsynth::testing::SimLlm;
using optsynth::testing::SimLlmOptions;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("optsynth_syn_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ProblemData knapsack22() { return build_knapsack({6, 10, 12}, {1, 2, 3}, 5); }

std::vector<SourceInstance> sources(std::size_t n, std::uint64_t seed = 3) {
  std::vector<SourceInstance> out;
  const char* classes[] = {"knapsack", "bin_packing", "assignment", "set_cover"};
  for (std::size_t i = 0; i < n; ++i) {
    GeneratorConfig cfg{classes[i % 4], {}, sub_seed(seed, i)};
    auto pd = generate(cfg);
    pd.name = std::string(classes[i % 4]) + "_" + std::to_string(i);
    out.push_back(make_source(pd));
  }
  return out;
}

std::string model_reply(const ProblemData& pd) {
  return "Formulation text\n```json\n" + nlohmann::json{{"model", to_json(pd)}}.dump() + "\n```";
}

}  // namespace

TEST_CASE("criticism_is_complete reads the verdict line") {
  CHECK(criticism_is_complete("Complete Instance"));
  CHECK(criticism_is_complete("  \"Complete Instance\"\n"));
  CHECK_FALSE(criticism_is_complete("Incomplete Instance:\n- missing bound"));
  CHECK_FALSE(criticism_is_complete("The instance is Complete Instance"));
}

TEST_CASE("backtranslation honours the refinement budget") {
  const auto pd = knapsack22();
  SUBCASE("no rounds keeps the first description") {
    SimLlm sim;
    Gateway gw(sim.backend());
    Rng rng(1);
    const auto bt = backtranslate(gw, "max v x", pd, 0, rng);
    CHECK(bt.iterations_used == 0);
    CHECK(bt.criticisms.empty());
    CHECK(bt.nl.find("(draft)") != std::string::npos);
    CHECK(sim.total_calls() == 1);
    CHECK(std::find(default_scenarios().begin(), default_scenarios().end(), bt.scenario_tag) !=
          default_scenarios().end());
  }
  SUBCASE("one round records one criticism and one refinement") {
    SimLlm sim;
    Gateway gw(sim.backend());
    Rng rng(1);
    const auto bt = backtranslate(gw, "max v x", pd, 1, rng);
    CHECK(bt.iterations_used == 1);
    CHECK(bt.criticisms.size() == 1);
    CHECK(bt.refinements.size() == 1);
    CHECK(bt.nl.find("(draft)") == std::string::npos);
    const auto lp = emit_lp(pd);
    CHECK(bt.nl.find(lp.substr(0, lp.size() - 1)) != std::string::npos);
  }
  SUBCASE("a complete verdict stops early") {
    SimLlm sim;
    Gateway gw(sim.backend());
    Rng rng(1);
    const auto bt = backtranslate(gw, "max v x", pd, 5, rng);
    CHECK(bt.iterations_used == 2);
    CHECK(bt.criticisms.size() == 2);
    CHECK(bt.refinements.size() == 1);
    CHECK(sim.calls(PromptId::kSelfCriticism) == 2);
    CHECK(sim.calls(PromptId::kSelfRefinement) == 1);
  }
  SUBCASE("a refinement that declines to refine keeps the text") {
    Gateway gw(std::make_shared<ScriptedBackend>([](const ChatRequest& r) -> std::string {
      if (r.template_id == PromptId::kInitialGeneration) return "first text";
      if (r.template_id == PromptId::kSelfCriticism) return "Incomplete Instance: none really";
      return "Nothing need to refine";
    }));
    Rng rng(1);
    const auto bt = backtranslate(gw, "", pd, 3, rng);
    CHECK(bt.nl == "first text");
    CHECK(bt.iterations_used == 1);
  }
  SUBCASE("negative budgets are rejected") {
    SimLlm sim;
    Gateway gw(sim.backend());
    Rng rng(1);
    CHECK_THROWS_AS(backtranslate(gw, "", pd, -1, rng), ConfigError);
  }
}

TEST_CASE("formulation replies are parsed, unwrapped and validated") {
  const auto pd = knapsack22();
  SUBCASE("fenced block with the model wrapper") {
    const auto r = parse_formulation_reply(model_reply(pd));
    CHECK(r.mf == "Formulation text");
    CHECK(structurally_equal(r.pd_prime, normalize(pd)));
  }
  SUBCASE("bare document without wrapper") {
    const auto r = parse_formulation_reply("here: " + to_json(pd).dump());
    CHECK(structurally_equal(r.pd_prime, normalize(pd)));
  }
  SUBCASE("strict relations are read as non-strict") {
    auto doc = to_json(pd);
    for (auto& c : doc["constraints"]) c["relation"] = "<";
    const auto r = parse_formulation_reply(doc.dump());
    for (const auto& c : r.pd_prime.constraints) CHECK(c.relation == Relation::kLessEqual);
  }
  SUBCASE("an undeclared variable fails validation") {
    auto doc = to_json(pd);
    doc["objective"][0]["factors"][0]["variable"] = "ghost";
    CHECK_THROWS_AS(parse_formulation_reply(doc.dump()), Error);
  }
  SUBCASE("no document at all") { CHECK_THROWS_AS(parse_formulation_reply("no json here"), ParseError); }
}

TEST_CASE("autoformulation repairs once and then gives up") {
  const auto pd = knapsack22();
  int calls = 0;
  auto bad = to_json(pd);
  bad["objective"][0]["factors"][0]["variable"] = "ghost";
  SUBCASE("repair succeeds") {
    Gateway gw(std::make_shared<ScriptedBackend>([&](const ChatRequest& r) {
      ++calls;
      return r.template_id == PromptId::kFormatRepair ? model_reply(pd) : bad.dump();
    }));
    const auto r = autoformulate(gw, "a question", 3);
    CHECK(r.repaired);
    CHECK(r.instruction_variant == 3);
    CHECK(calls == 2);
  }
  SUBCASE("repair fails") {
    Gateway gw(std::make_shared<ScriptedBackend>([&](const ChatRequest&) {
      ++calls;
      return bad.dump();
    }));
    try {
      autoformulate(gw, "a question");
      FAIL("expected a StageError");
    } catch (const StageError& e) {
      CHECK(e.stage() == "formulation-parse");
    }
    CHECK(calls == 2);
  }
}

TEST_CASE("verify compares optimal values") {
  const auto pd = knapsack22();
  SUBCASE("identical models are accepted") {
    const auto v = verify(pd, pd);
    CHECK(v.verdict == Verdict::kAccepted);
    CHECK(*v.source.objective == doctest::Approx(22));
  }
  SUBCASE("a doubled objective is a value mismatch") {
    auto prime = pd;
    prime.objective = pd.objective.scaled(2.0);
    const auto v = verify(pd, prime);
    CHECK(v.verdict == Verdict::kRejected);
    CHECK(v.reason == "value-mismatch");
    CHECK(*v.prime.objective == doctest::Approx(44));
  }
  SUBCASE("an infeasible source is never accepted") {
    auto infeasible = pd;
    Constraint c;
    c.name = "impossible";
    c.body = Expression::variable(pd.variables.front().name);
    c.relation = Relation::kGreaterEqual;
    c.rhs = 5;
    infeasible.constraints.push_back(c);
    CHECK(verify(infeasible, infeasible).reason == "source-not-optimal");
    CHECK(verify(pd, infeasible).reason == "formulation-not-optimal");
  }
}

TEST_CASE("the tolerance contract matches direct arithmetic") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> mag(-1000, 1000), rel(-3e-6, 3e-6);
  int agree = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const double ov = std::round(mag(gen));
    const double ov_prime = ov + rel(gen) * (std::abs(ov) + 1.0);
    auto source = knapsack22();
    source.objective = Expression::constant(ov);
    auto prime = source;
    prime.objective = Expression::constant(ov_prime);
    const bool expected = std::abs(ov_prime - ov) / (std::abs(ov) + 1.0) < 1e-6;
    const bool got = verify(source, prime).verdict == Verdict::kAccepted;
    CHECK(got == expected);
    agree += got == expected;
  }
  CHECK(agree == 400);
}

TEST_CASE("primary tier picks the nearest midpoint") {
  const auto& tiers = default_tiers();
  CHECK(primary_tier(30, tiers) == "easy");
  CHECK(primary_tier(75, tiers) == "medium_easy");  // midpoints 50 and 75
  CHECK(primary_tier(62.5, tiers) == "easy");       // tie goes to the lower tier
  CHECK(primary_tier(1.0, tiers) == "none");
}

TEST_CASE("synthesize records every outcome without throwing") {
  const auto src = make_source(knapsack22());
  SynthesisOptions opts;
  opts.seed = 9;
  SUBCASE("clean run is accepted") {
    SimLlm sim;
    Gateway gw(sim.backend());
    const auto rec = synthesize(gw, src, opts);
    CHECK(rec.verdict == Verdict::kAccepted);
    CHECK(rec.ov.value_or(-1) == doctest::Approx(22));
    CHECK(rec.ov_prime.value_or(-1) == doctest::Approx(22));
    CHECK(rec.iterations_used == 1);
    CHECK(reverify(rec));
  }
  SUBCASE("transport failure") {
    Gateway gw(std::make_shared<ScriptedBackend>([](const ChatRequest&) -> std::string {
      throw GatewayError("connection refused");
    }));
    const auto rec = synthesize(gw, src, opts);
    CHECK(rec.reject_reason == "backtranslation-error");
    CHECK(rec.ov.value_or(-1) == doctest::Approx(22));
  }
  SUBCASE("empty description") {
    Gateway gw(std::make_shared<ScriptedBackend>([](const ChatRequest&) { return std::string("  "); }));
    opts.refine_rounds = 0;
    CHECK(synthesize(gw, src, opts).reject_reason == "backtranslation-empty");
  }
  SUBCASE("unparseable formulation") {
    SimLlm sim({.unrepairable_rate = 1.0});
    Gateway gw(sim.backend());
    CHECK(synthesize(gw, src, opts).reject_reason == "formulation-parse");
  }
  SUBCASE("wrong value") {
    SimLlm sim({.mismatch_rate = 1.0});
    Gateway gw(sim.backend());
    const auto rec = synthesize(gw, src, opts);
    CHECK(rec.reject_reason == "value-mismatch");
    CHECK(rec.ov_prime.value_or(-1) == doctest::Approx(45));
    CHECK_FALSE(reverify(rec));
  }
}

TEST_CASE("record JSON round trip") {
  SimLlm sim;
  Gateway gw(sim.backend());
  const auto rec = synthesize(gw, make_source(knapsack22()), {});
  const auto back = TripletRecord::from_json(rec.to_json());
  CHECK(back.to_json() == rec.to_json());
  auto j = rec.to_json();
  j["schema"] = "something/2";
  CHECK_THROWS_AS(TripletRecord::from_json(j), ParseError);
}

TEST_CASE("a batch loses no instance and keeps input order") {
  const auto srcs = sources(24);
  SimLlm sim({.mismatch_rate = 0.25, .garble_rate = 0.25, .unrepairable_rate = 0.1});
  Gateway gw(sim.backend());
  SynthesisOptions opts;
  opts.jobs = 4;
  const auto dir = fresh_dir("batch");
  const auto run = synthesize_all(gw, srcs, opts, dir);
  CHECK(run.accepted.size() + run.rejected.size() == srcs.size());
  CHECK_FALSE(run.accepted.empty());
  CHECK_FALSE(run.rejected.empty());

  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < srcs.size(); ++i) position[srcs[i].id] = i;
  for (const auto* part : {&run.accepted, &run.rejected}) {
    for (std::size_t i = 1; i < part->size(); ++i) CHECK(position[(*part)[i - 1].id] < position[(*part)[i].id]);
  }
  for (const auto& r : run.accepted) {
    CHECK(r.verdict == Verdict::kAccepted);
    CHECK(reverify(r));
  }
  for (const auto& r : run.rejected) CHECK_FALSE(r.reject_reason.empty());

  const auto accepted = read_records(dir / "accepted.jsonl");
  const auto rejected = read_records(dir / "rejected.jsonl");
  CHECK(accepted.size() == run.accepted.size());
  CHECK(rejected.size() == run.rejected.size());
}

TEST_CASE("replayed synthesis is byte-identical") {
  const auto srcs = sources(8);
  const auto fixtures = fresh_dir("fixtures");
  SynthesisOptions opts;
  opts.seed = 5;
  opts.jobs = 3;
  {
    SimLlm sim({.mismatch_rate = 0.3});
    GatewayOptions go;
    go.record_dir = fixtures;
    Gateway gw(sim.backend(), go);
    synthesize_all(gw, srcs, opts, fresh_dir("live"));
  }
  BackendConfig cfg;
  cfg.kind = BackendKind::kReplay;
  cfg.fixture_dir = fixtures;
  for (const char* name : {"replay_a", "replay_b"}) {
    Gateway gw(make_backend(cfg));
    synthesize_all(gw, srcs, opts, fresh_dir(name));
  }
  const auto tmp = std::filesystem::temp_directory_path();
  for (const char* file : {"accepted.jsonl", "rejected.jsonl"}) {
    const auto live = slurp(tmp / "optsynth_syn_live" / file);
    CHECK(live == slurp(tmp / "optsynth_syn_replay_a" / file));
    CHECK(live == slurp(tmp / "optsynth_syn_replay_b" / file));
  }
}
