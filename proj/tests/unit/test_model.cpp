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

#include "doctest.h"
#include "examples.hpp"
#include "optsynth/errors.hpp"
#include "optsynth/model.hpp"
#include "optsynth/model_json.hpp"

using namespace optsynth;
using optsynth::testing::num;
using optsynth::testing::var;

namespace {

bool has_code(const std::vector<Diagnostic>& ds, const std::string& code) {
  for (const auto& d : ds) {
    if (d.code == code) return true;
  }
  return false;
}

ProblemData tiny(Constraint c, std::vector<Variable> vars) {
  ProblemData pd;
  pd.name = "tiny";
  pd.variables = std::move(vars);
  pd.objective = var(pd.variables.front().name);
  pd.constraints.push_back(std::move(c));
  return pd;
}

}  // namespace

TEST_CASE("terms merge and drop zeros") {
  Expression e = var("x") + var("x");
  REQUIRE(e.size() == 1);
  CHECK(e.terms()[0].coefficient() == 2.0);
  e = e - var("x", 2);
  CHECK(e.empty());
  Term t(3.0, {{"y", 1}, {"x", 1}, {"x", 1}});
  REQUIRE(t.factors().size() == 2);
  CHECK(t.factors()[0].variable == "x");
  CHECK(t.factors()[0].exponent == 2);
  CHECK(t.degree() == 3);
  CHECK_THROWS_AS(Term(1.0, {{"x", 0}}), ValidationError);
}

TEST_CASE("normalize moves constants and merges duplicates") {
  auto c = Constraint::from_sides("dup", var("x") + var("x"), Relation::kLessEqual, num(2));
  auto pd = normalize(tiny(c, {{"x", VariableKind::kContinuous}}));
  const auto& row = pd.constraints[0];
  CHECK(row.body == var("x", 2));
  CHECK(row.rhs == 2.0);

  // x1 >= 5 - 100 (1 - y1)  <=>  x1 - 100 y1 >= -95
  Expression rhs = num(5) - 100.0 * (num(1) - var("y1"));
  auto bigm = Constraint::from_sides("m", var("x1"), Relation::kGreaterEqual, rhs);
  auto pd2 = normalize(tiny(bigm, {{"x1", VariableKind::kInteger}, {"y1", VariableKind::kBinary, 0, 1}}));
  CHECK(pd2.constraints[0].body == var("x1") + var("y1", -100));
  CHECK(pd2.constraints[0].rhs == -95.0);
  CHECK(pd2.constraints[0].relation == Relation::kGreaterEqual);
}

TEST_CASE("normalize is idempotent") {
  auto pd = optsynth::testing::production_example_indicators();
  CHECK(structurally_equal(normalize(pd), pd));
  auto again = normalize(normalize(pd));
  CHECK(structurally_equal(again, normalize(pd)));
  CHECK_FALSE(has_code(validate(again), "duplicate-term"));
}

TEST_CASE("normalize rejects unknown references") {
  auto c = Constraint::from_sides("bad", var("q"), Relation::kLessEqual, num(1));
  CHECK_THROWS_AS(normalize(tiny(c, {{"x", VariableKind::kContinuous}})), ValidationError);
}

TEST_CASE("classify follows the structural rule") {
  auto lin = Constraint::from_sides("l", var("x1", 2) + var("x2", 3), Relation::kLessEqual, num(100));
  CHECK(classify(lin) == ConstraintKind::kLinear);
  Expression q;
  q.add(Term(0.5, {{"x1", 2}})).add(Term(0.3, {{"x2", 2}}));
  CHECK(classify(Constraint::from_sides("q", var("z"), Relation::kGreaterEqual, q)) == ConstraintKind::kQuadratic);
  Expression g;
  g.add(Term(1.0, {{"x1", 1}}, TranscendentalFactor{TranscendentalFunction::kExp, "x2"}));
  CHECK(classify(Constraint::from_sides("g", g, Relation::kLessEqual, num(100))) == ConstraintKind::kGeneral);
  Expression cubic;
  cubic.add(Term(1.0, {{"x", 3}}));
  CHECK(classify(Constraint::from_sides("c", cubic, Relation::kLessEqual, num(1))) == ConstraintKind::kGeneral);
  auto ind = lin;
  ind.guard = IndicatorGuard{"y", 1};
  CHECK(classify(ind) == ConstraintKind::kIndicator);
}

TEST_CASE("validate diagnostics") {
  auto pd = optsynth::testing::production_example_indicators();
  CHECK(validate(pd).empty());

  auto unknown = Constraint::from_sides("u", var("ghost"), Relation::kLessEqual, num(1));
  auto ds = validate(tiny(unknown, {{"x", VariableKind::kContinuous}}));
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].code == "unknown-variable");
  CHECK(ds[0].location == "constraint 'u'");

  auto ok = Constraint::from_sides("c", var("b"), Relation::kLessEqual, num(1));
  ds = validate(tiny(ok, {{"b", VariableKind::kBinary, 0, 2}}));
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].code == "binary-domain");

  ProblemData empty;
  CHECK(has_code(validate(empty), "no-variables"));

  auto guarded = Constraint::from_sides("g", var("x") + var("y"), Relation::kLessEqual, num(1));
  guarded.guard = IndicatorGuard{"y", 1};
  ds = validate(tiny(guarded, {{"x", VariableKind::kContinuous}, {"y", VariableKind::kBinary, 0, 1}}));
  CHECK(has_code(ds, "guard-in-body"));
  guarded.body = var("x");
  ds = validate(tiny(guarded, {{"x", VariableKind::kContinuous}, {"y", VariableKind::kInteger, 0, 1}}));
  CHECK(has_code(ds, "guard-not-binary"));

  ProblemData dupvar = tiny(ok, {{"b", VariableKind::kBinary, 0, 1}, {"b", VariableKind::kBinary, 0, 1}});
  CHECK(has_code(validate(dupvar), "duplicate-variable"));
  ProblemData order = tiny(ok, {{"b", VariableKind::kContinuous, 3, 1}});
  CHECK(has_code(validate(order), "bound-order"));
}

TEST_CASE("json schema roundtrip") {
  auto pd = optsynth::testing::production_example_indicators();
  pd.metadata["seed_class"] = "demo";
  const auto text = to_json_text(pd, 2);
  auto back = problem_from_json_text(text);
  CHECK(structurally_equal(back, pd));
  CHECK(back.metadata == pd.metadata);
  CHECK(to_json_text(back, 2) == text);
  auto doc = nlohmann::json::parse(text);
  for (const char* key : {"name", "sense", "objective", "variables", "constraints", "metadata"}) {
    CHECK(doc.contains(key));
  }
}

TEST_CASE("json schema errors carry a path") {
  auto doc = to_json(optsynth::testing::production_example_indicators());
  doc["constraints"][1]["relation"] = "~";
  try {
    problem_from_json(doc);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("constraints[1]") != std::string::npos);
  }
  CHECK_THROWS_AS(problem_from_json_text("{not json"), ParseError);
}

TEST_CASE("json accepts infinite bound strings") {
  const char* text = R"({"name":"t","sense":"maximize","objective":[{"coefficient":1,"factors":["x"]}],
    "variables":[{"name":"x","kind":"continuous","lower":"-inf","upper":"inf"}],"constraints":[]})";
  auto pd = problem_from_json_text(text);
  CHECK(pd.variables[0].lower == -kInfinity);
  CHECK(pd.variables[0].upper == kInfinity);
  CHECK(pd.sense == ObjectiveSense::kMaximize);
}

TEST_CASE("format_number is shortest round trip") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(2.5) == "2.5");
  CHECK(format_number(100) == "100");
  CHECK(std::stod(format_number(0.1 + 0.2)) == 0.1 + 0.2);
}

TEST_CASE("render_math mentions every constraint") {
  auto text = render_math(optsynth::testing::production_example_indicators());
  for (const char* name : {"resource", "min1", "inventory", "coupling"}) {
    CHECK(text.find(name) != std::string::npos);
  }
}
