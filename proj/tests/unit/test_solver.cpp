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
#include <random>

#include "doctest.h"
#include "examples.hpp"
#include "optsynth/errors.hpp"
#include "optsynth/solver.hpp"
#include "oracle.hpp"

using namespace optsynth;
using optsynth::testing::num;
using optsynth::testing::var;

namespace {

ProblemData knapsack(const std::vector<double>& values, const std::vector<double>& weights, double cap) {
  ProblemData pd;
  pd.name = "knapsack";
  pd.sense = ObjectiveSense::kMaximize;
  Expression load;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::string name = "x" + std::to_string(i);
    pd.variables.push_back({name, VariableKind::kBinary, 0, 1});
    pd.objective.add(Term::linear(values[i], name));
    load.add(Term::linear(weights[i], name));
  }
  pd.constraints.push_back(Constraint::from_sides("cap", load, Relation::kLessEqual, num(cap)));
  return normalize(pd);
}

ProblemData random_integer_model(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nv(1, 7), nc(1, 5), coef(-9, 9), ub(1, 3), rel(0, 2);
  ProblemData pd;
  pd.sense = rel(rng) == 0 ? ObjectiveSense::kMaximize : ObjectiveSense::kMinimize;
  const int n = nv(rng);
  for (int j = 0; j < n; ++j) {
    const int u = ub(rng);
    pd.variables.push_back({"v" + std::to_string(j), u == 1 ? VariableKind::kBinary : VariableKind::kInteger, 0,
                            static_cast<double>(u)});
    pd.objective.add(Term::linear(coef(rng), pd.variables.back().name));
  }
  const int m = nc(rng);
  for (int r = 0; r < m; ++r) {
    Constraint c;
    c.name = "r" + std::to_string(r);
    for (int j = 0; j < n; ++j) c.body.add(Term::linear(coef(rng), pd.variables[j].name));
    c.relation = static_cast<Relation>(rel(rng));
    c.rhs = coef(rng);
    if (c.relation == Relation::kEqual) c.relation = Relation::kLessEqual;
    pd.constraints.push_back(c);
  }
  return normalize(pd);
}

std::filesystem::path runner() { return std::filesystem::path(OPTSYNTH_SOURCE_DIR) / "tools" / "highs_lp_solve.py"; }

bool highs_available() {
  return std::system("python3 -c 'import highspy' > /dev/null 2>&1") == 0;
}

}  // namespace

TEST_CASE("knapsack optimum") {
  auto out = solve_builtin(knapsack({6, 10, 12}, {1, 2, 3}, 5));
  REQUIRE(out.status == SolveStatus::kOptimal);
  CHECK(*out.objective == doctest::Approx(22));
  CHECK(out.solution->at("x0") == 0);
  CHECK(max_violation(knapsack({6, 10, 12}, {1, 2, 3}, 5), *out.solution) <= 1e-6);
}

TEST_CASE("bounded LP") {
  ProblemData pd;
  pd.sense = ObjectiveSense::kMaximize;
  pd.variables = {{"x", VariableKind::kContinuous}, {"y", VariableKind::kContinuous}};
  pd.objective = var("x") + var("y");
  pd.constraints.push_back(Constraint::from_sides("a", var("x"), Relation::kLessEqual, num(2)));
  pd.constraints.push_back(Constraint::from_sides("b", var("y"), Relation::kLessEqual, num(3)));
  auto out = solve_builtin(normalize(pd));
  REQUIRE(out.status == SolveStatus::kOptimal);
  CHECK(*out.objective == doctest::Approx(5));
}

TEST_CASE("infeasible and unbounded") {
  ProblemData pd;
  pd.variables = {{"x", VariableKind::kContinuous}};
  pd.objective = var("x");
  pd.constraints.push_back(Constraint::from_sides("lo", var("x"), Relation::kGreaterEqual, num(1)));
  pd.constraints.push_back(Constraint::from_sides("hi", var("x"), Relation::kLessEqual, num(0)));
  auto out = solve_builtin(normalize(pd));
  CHECK(out.status == SolveStatus::kInfeasible);
  CHECK_FALSE(out.objective.has_value());

  ProblemData ub;
  ub.sense = ObjectiveSense::kMaximize;
  ub.variables = {{"x", VariableKind::kContinuous}, {"y", VariableKind::kInteger}};
  ub.objective = var("x") + var("y");
  ub.constraints.push_back(Constraint::from_sides("c", var("x") - var("y"), Relation::kLessEqual, num(1)));
  CHECK(solve_builtin(normalize(ub)).status == SolveStatus::kUnbounded);
}

TEST_CASE("free and negative variables") {
  ProblemData pd;
  pd.variables = {{"x", VariableKind::kContinuous, -kInfinity, kInfinity},
                  {"y", VariableKind::kInteger, -kInfinity, -2.5}};
  pd.objective = var("x") - var("y");
  pd.constraints.push_back(Constraint::from_sides("c", var("x") + var("y"), Relation::kGreaterEqual, num(-10)));
  pd.constraints.push_back(Constraint::from_sides("d", var("x") - var("y", 2), Relation::kEqual, num(1.5)));
  // x = 1.5 + 2y, objective 1.5 + y, need 3y >= -11.5 -> y >= -3.83 -> y = -3
  auto out = solve_builtin(normalize(pd));
  REQUIRE(out.status == SolveStatus::kOptimal);
  CHECK(*out.objective == doctest::Approx(-1.5));
  CHECK(out.solution->at("y") == -3);
}

TEST_CASE("indicator rows are enforced only when active") {
  ProblemData pd;
  pd.variables = {{"x", VariableKind::kContinuous, 0, 10}, {"y", VariableKind::kBinary, 0, 1}};
  pd.objective = var("x") + var("y", 0.5);
  pd.constraints.push_back(Constraint::from_sides("need", var("x") + var("y", 4), Relation::kGreaterEqual, num(4)));
  auto ind = Constraint::from_sides("setup", var("x"), Relation::kGreaterEqual, num(3));
  ind.guard = IndicatorGuard{"y", 1};
  pd.constraints.push_back(ind);
  // y = 1 costs 0.5 + 3; y = 0 costs 4.
  auto out = solve_builtin(normalize(pd));
  REQUIRE(out.status == SolveStatus::kOptimal);
  CHECK(*out.objective == doctest::Approx(3.5));
  CHECK(out.solution->at("y") == 1);

  ind.guard = IndicatorGuard{"y", 0};
  pd.constraints[1] = ind;
  out = solve_builtin(normalize(pd));
  REQUIRE(out.status == SolveStatus::kOptimal);
  CHECK(*out.objective == doctest::Approx(0.5));
}

TEST_CASE("indicator and big-M expansion agree") {
  const auto pd = optsynth::testing::production_example_indicators();
  ProblemData linear = pd;
  std::erase_if(linear.constraints, [](const Constraint& c) {
    auto k = classify(c);
    return k == ConstraintKind::kQuadratic || k == ConstraintKind::kGeneral;
  });
  linear.objective = var("x1", -3) - var("x2", 2) + var("y1", 10) + var("y2", 8);
  const auto a = solve_builtin(linear);
  const auto b = solve_builtin(big_m_expand(linear, 100));
  REQUIRE(a.status == SolveStatus::kOptimal);
  REQUIRE(b.status == SolveStatus::kOptimal);
  CHECK(*a.objective == doctest::Approx(*b.objective));
}

TEST_CASE("random integer models match enumeration") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const auto pd = random_integer_model(rng);
    const auto oracle = optsynth::testing::enumerate_optimum(pd);
    const auto out = solve_builtin(pd);
    if (!oracle.feasible) {
      REQUIRE(out.status == SolveStatus::kInfeasible);
      continue;
    }
    REQUIRE(out.status == SolveStatus::kOptimal);
    REQUIRE(values_match(*out.objective, oracle.objective));
    REQUIRE(max_violation(pd, *out.solution) <= 1e-6);
  }
}

TEST_CASE("capability errors") {
  auto pd = optsynth::testing::production_example_indicators();
  CHECK_THROWS_AS(solve_builtin(pd), CapabilityError);
  DeskCap tiny{2, 2};
  CHECK_THROWS_AS(solve_builtin(knapsack({1, 2, 3}, {1, 1, 1}, 2), {}, tiny), CapabilityError);
  SolverConfig cfg;
  auto out = solve(pd, cfg);
  CHECK(out.status == SolveStatus::kError);
  CHECK(out.info.at("error").find("external") != std::string::npos);
}

TEST_CASE("limits validation") {
  SolverLimits l;
  l.feasibility_tol = 1e-2;
  CHECK_THROWS_AS(l.check(), ConfigError);
  l = {};
  l.integrality_tol = 0;
  CHECK_THROWS_AS(l.check(), ConfigError);
}

TEST_CASE("node limit reports time-limit") {
  SolverLimits l;
  l.node_limit = 1;
  std::vector<double> v, w;
  for (int i = 0; i < 12; ++i) {
    v.push_back(10 + i * 3 % 7);
    w.push_back(5 + i * 5 % 11);
  }
  auto out = solve_builtin(knapsack(v, w, 37.5), l);
  CHECK(out.status == SolveStatus::kTimeLimit);
  CHECK_FALSE(out.objective.has_value());
  CHECK(out.info.at("limit") == "node");
}

TEST_CASE("values_match follows the relative formula") {
  CHECK(values_match(100, 100, 1e-6));
  CHECK_FALSE(values_match(100.001, 100, 1e-6));
  CHECK(values_match(1e-7, 0, 1e-6));
  // Asymmetric: the denominator uses the ground truth.
  const double a = 0.0, b = 9e-7 * 1.5;
  CHECK(values_match(a, b, 1e-6) == (std::abs(a - b) / (std::abs(b) + 1) < 1e-6));
  CHECK(values_match(0.0, 0.9, 0.5));
  CHECK_FALSE(values_match(0.9, 0.0, 0.5));
  CHECK_FALSE(values_match(std::nan(""), 1.0, 1e-6));
}

TEST_CASE("external solver agrees with built-in") {
  if (!highs_available()) {
    MESSAGE("highspy not importable; skipping");
    return;
  }
  auto spec = ExternalSolverSpec::highs_runner(runner());
  auto pd = knapsack({6, 10, 12}, {1, 2, 3}, 5);
  auto out = solve_external(pd, spec);
  REQUIRE_MESSAGE(out.status == SolveStatus::kOptimal, out.info["error"], out.info["output"]);
  CHECK(values_match(*out.objective, 22));
  CHECK(out.solution->at("x2") == doctest::Approx(1));

  auto ind = optsynth::testing::production_example_indicators();
  std::erase_if(ind.constraints, [](const Constraint& c) { return classify(c) == ConstraintKind::kGeneral ||
                                                                  classify(c) == ConstraintKind::kQuadratic; });
  ind.objective = var("x1", -3) - var("x2", 2) + var("y1", 10) + var("y2", 8);
  for (auto& v : ind.variables) {
    if (v.name == "x1" || v.name == "x2") v.upper = 60;
  }
  auto ext = solve_external(ind, spec);
  auto own = solve_builtin(ind);
  REQUIRE(ext.status == SolveStatus::kOptimal);
  CHECK(values_match(*ext.objective, *own.objective));
}

TEST_CASE("external solver failures") {
  ExternalSolverSpec missing;
  missing.command_template = "definitely-not-a-solver-binary {input} {output}";
  auto out = solve_external(knapsack({1}, {1}, 1), missing);
  CHECK(out.status == SolveStatus::kError);
  CHECK(out.info.at("error").find("definitely-not-a-solver-binary") != std::string::npos);

  const auto script = std::filesystem::temp_directory_path() / "optsynth-slow-solver.sh";
  {
    std::ofstream f(script);
    f << "#!/bin/sh\nsleep 30\n";
  }
  std::filesystem::permissions(script, std::filesystem::perms::owner_all);
  ExternalSolverSpec slow;
  slow.command_template = script.string() + " {input}";
  slow.kill_grace = 0.05;
  SolverLimits l;
  l.time_limit = 0.05;
  out = solve_external(knapsack({1}, {1}, 1), slow, l);
  CHECK(out.status == SolveStatus::kTimeLimit);
  CHECK(out.solve_time < 5);
  std::filesystem::remove(script);

  ExternalSolverSpec echo;
  echo.command_template = "sh -c echo {input}";
  echo.status_mapping = {{"optimal", SolveStatus::kOptimal}};
  out = solve_external(knapsack({1}, {1}, 1), echo);
  CHECK(out.status == SolveStatus::kError);

  ExternalSolverSpec bad;
  bad.command_template = "solver";
  CHECK_THROWS_AS(bad.check(), ConfigError);
}

TEST_CASE("external objective extraction is pattern driven") {
  const auto dir = std::filesystem::temp_directory_path() / "optsynth-fake-solver";
  std::filesystem::create_directories(dir);
  const auto script = dir / "fake.sh";
  {
    std::ofstream f(script);
    f << "#!/bin/sh\nprintf 'Model status : Optimal\\nObjective value : 4.25e1\\n'\n";
  }
  std::filesystem::permissions(script, std::filesystem::perms::owner_all);
  ExternalSolverSpec spec;
  spec.command_template = script.string() + " {input}";
  spec.status_pattern = R"(Model status\s*:\s*(\w+))";
  spec.objective_pattern = R"(Objective value\s*:\s*(\S+))";
  spec.status_mapping = {{"Optimal", SolveStatus::kOptimal}};
  auto out = solve_external(knapsack({1}, {1}, 1), spec);
  REQUIRE(out.status == SolveStatus::kOptimal);
  CHECK(*out.objective == 42.5);

  spec.objective_pattern = R"(Model status\s*:\s*(\w+))";
  out = solve_external(knapsack({1}, {1}, 1), spec);
  CHECK(out.status == SolveStatus::kError);
  std::filesystem::remove_all(dir);
}
