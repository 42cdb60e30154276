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

#include <random>

#include "doctest.h"
#include "examples.hpp"
#include "optsynth/errors.hpp"
#include "optsynth/lp_io.hpp"

using namespace optsynth;
using optsynth::testing::num;
using optsynth::testing::var;

namespace {

ProblemData without_general(ProblemData pd) {
  std::erase_if(pd.constraints, [](const Constraint& c) { return classify(c) == ConstraintKind::kGeneral; });
  return pd;
}

ProblemData random_milp(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nvars(1, 8), ncons(0, 6), coef(-20, 20), kind(0, 2);
  ProblemData pd;
  pd.name = "rand";
  pd.sense = kind(rng) == 0 ? ObjectiveSense::kMaximize : ObjectiveSense::kMinimize;
  const int n = nvars(rng);
  for (int i = 0; i < n; ++i) {
    Variable v{"v" + std::to_string(i), static_cast<VariableKind>(kind(rng)), 0, kInfinity};
    if (v.kind == VariableKind::kBinary) v.upper = 1;
    else if (coef(rng) > 10) v.upper = std::abs(coef(rng)) + 0.5;
    if (v.kind == VariableKind::kContinuous && coef(rng) > 15) v.lower = -kInfinity;
    pd.variables.push_back(v);
  }
  for (int i = 0; i < n; ++i) pd.objective.add(Term::linear(coef(rng) / 4.0, pd.variables[i].name));
  const int m = ncons(rng);
  for (int r = 0; r < m; ++r) {
    Constraint c;
    c.name = "row" + std::to_string(r);
    for (int i = 0; i < n; ++i) {
      if (coef(rng) > 5) c.body.add(Term::linear(coef(rng), pd.variables[i].name));
    }
    c.relation = static_cast<Relation>(kind(rng));
    c.rhs = coef(rng) * 1.25;
    pd.constraints.push_back(c);
  }
  return pd;
}

}  // namespace

TEST_CASE("single row transcription") {
  ProblemData pd;
  pd.variables = {{"x1", VariableKind::kContinuous}, {"x2", VariableKind::kContinuous}};
  pd.objective = var("x1");
  pd.constraints.push_back(Constraint::from_sides("c0", var("x1", 2) + var("x2", 3), Relation::kLessEqual, num(100)));
  const auto text = emit_lp(normalize(pd));
  CHECK(text.find("Subject To\n  c0: 2 x1 + 3 x2 <= 100\n") != std::string::npos);
  CHECK(text.rfind("End\n") == text.size() - 4);
}

TEST_CASE("worked example roundtrip without the general row") {
  const auto pd = without_general(optsynth::testing::production_example_indicators());
  const auto text = emit_lp(pd);
  CHECK(text.find("y1 = 1 -> x1 >= 5") != std::string::npos);
  CHECK(text.find("[") != std::string::npos);
  const auto back = parse_lp(text);
  CHECK_MESSAGE(structurally_equal(back, pd), structural_difference(back, pd));
  CHECK(emit_lp(back) == text);

  const auto expanded = without_general(optsynth::testing::production_example());
  const auto back2 = parse_lp(emit_lp(expanded));
  CHECK_MESSAGE(structurally_equal(back2, expanded), structural_difference(back2, expanded));
  CHECK(back2.constraints[3].big_m_origin == expanded.constraints[3].big_m_origin);
}

TEST_CASE("quadratic objective roundtrip") {
  ProblemData pd;
  pd.variables = {{"a", VariableKind::kContinuous}, {"b", VariableKind::kContinuous}};
  pd.objective.add(Term(1.5, {{"a", 2}})).add(Term(-2.0, {{"a", 1}, {"b", 1}})).add(Term::linear(3, "b"));
  pd.constraints.push_back(Constraint::from_sides("s", var("a") + var("b"), Relation::kGreaterEqual, num(1)));
  pd = normalize(pd);
  const auto text = emit_lp(pd);
  CHECK(text.find("] / 2") != std::string::npos);
  auto back = parse_lp(text);
  CHECK_MESSAGE(structurally_equal(back, pd), structural_difference(back, pd));
}

TEST_CASE("general nonlinear rows are rejected") {
  const auto pd = optsynth::testing::production_example_indicators();
  try {
    emit_lp(pd);
    FAIL("expected UnsupportedConstructError");
  } catch (const UnsupportedConstructError& e) {
    CHECK(std::string(e.what()).find("coupling") != std::string::npos);
  }
  LpDialectOptions no_ind;
  no_ind.emit_indicators = false;
  CHECK_THROWS_AS(emit_lp(without_general(pd), no_ind), UnsupportedConstructError);
  LpDialectOptions narrow;
  narrow.max_line_width = 10;
  CHECK_THROWS_AS(narrow.check(), ConfigError);
}

TEST_CASE("name sanitization") {
  CHECK(sanitize_name("x[1,2]", NameSanitization::kPermissive) == "x_1_2_");
  CHECK(sanitize_name("9lives", NameSanitization::kPermissive) == "_9lives");
  CHECK(sanitize_name("end", NameSanitization::kPermissive) == "end_");
  CHECK_THROWS(sanitize_name("a-b", NameSanitization::kStrict));
  CHECK(sanitize_name("ok_1", NameSanitization::kStrict) == "ok_1");

  ProblemData pd;
  pd.variables = {{"a-b", VariableKind::kContinuous}, {"a_b", VariableKind::kContinuous}};
  pd.objective = var("a-b") + var("a_b");
  CHECK_THROWS_AS(emit_lp(pd), UnsupportedConstructError);
}

TEST_CASE("long rows wrap at the width limit") {
  ProblemData pd;
  Expression body;
  for (int i = 0; i < 60; ++i) {
    pd.variables.push_back({"long_variable_name_" + std::to_string(i), VariableKind::kContinuous});
    body.add(Term::linear(i + 1, pd.variables.back().name));
  }
  pd.objective = body;
  pd.constraints.push_back(Constraint::from_sides("wide", body, Relation::kLessEqual, num(1000)));
  pd = normalize(pd);
  LpDialectOptions opts;
  opts.max_line_width = 64;
  const auto text = emit_lp(pd, opts);
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    CHECK(lp_length(text.substr(start, end - start)) <= 64);
    start = end + 1;
  }
  CHECK(structurally_equal(parse_lp(text), pd));
}

TEST_CASE("parser conventions") {
  const char* text =
      "\\ hand written\n"
      "MAXIMIZE\n"
      " obj: 3 x + 2 y\n"
      "subject to\n"
      " c1: x + y < 4\n"
      " x + 3 y <= 6\n"
      "  - x >= -3\n"
      "bounds\n"
      " y <= 10\n"
      " -inf <= w <= 5\n"
      "generals\n"
      " x\n"
      "binary\n"
      " b\n"
      "end\n";
  auto pd = parse_lp(text);
  CHECK(pd.sense == ObjectiveSense::kMaximize);
  REQUIRE(pd.constraints.size() == 3);
  CHECK(pd.constraints[0].relation == Relation::kLessEqual);
  CHECK(pd.constraints[1].name == "R2");
  CHECK(pd.constraints[2].body == var("x", -1));
  CHECK(pd.find_variable("x")->kind == VariableKind::kInteger);
  CHECK(pd.find_variable("y")->upper == 10);
  CHECK(pd.find_variable("w")->lower == -kInfinity);
  CHECK(pd.find_variable("b")->upper == 1);
  CHECK(pd.find_variable("b")->kind == VariableKind::kBinary);
}

TEST_CASE("parser errors") {
  auto error_at = [](const char* text) -> std::pair<std::size_t, std::string> {
    try {
      parse_lp(text);
    } catch (const ParseError& e) {
      return {e.line(), e.what()};
    }
    return {0, ""};
  };
  auto [line, msg] = error_at("Minimize\n obj: x\nSubject To\n c: x >= 1\n");
  CHECK(line == 4);
  CHECK(msg.find("End") != std::string::npos);
  std::tie(line, msg) = error_at("Minimize\n obj: x\nSubject To\n c: x >= 1\n c: x <= 3\nEnd\n");
  CHECK(line == 5);
  CHECK(msg.find("duplicate") != std::string::npos);
  std::tie(line, msg) = error_at("Minimize\n obj: x\nSOS\n s1: x:1\nEnd\n");
  CHECK(line == 3);
  CHECK(msg.find("unknown section") != std::string::npos);
  std::tie(line, msg) = error_at("Minimize\n obj: x\nSubject To\n c: x $ 1\nEnd\n");
  CHECK(line == 4);
  std::tie(line, msg) = error_at("Minimize\n obj: x\nSubject To\n c: x 2 y >= 1\nEnd\n");
  CHECK(line == 4);
  std::tie(line, msg) = error_at("Minimize\n obj: x\nSubject To\n c: y = 1 -> x >= 1\nEnd\n");
  CHECK(msg.find("guard") != std::string::npos);
}

TEST_CASE("lp_length counts code points") {
  CHECK(lp_length("") == 0);
  CHECK(lp_length("End\n") == 4);
  CHECK(lp_length("\xc3\xa9") == 1);
}

TEST_CASE("random MILP roundtrip property") {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 300; ++trial) {
    const auto pd = normalize(random_milp(rng));
    const auto text = emit_lp(pd);
    const auto back = parse_lp(text);
    REQUIRE_MESSAGE(structurally_equal(back, pd), structural_difference(back, pd) << "\n" << text);
    REQUIRE(emit_lp(back) == text);
  }
}
