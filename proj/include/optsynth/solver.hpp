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

// Built-in LP/MILP solver, external solver adapter and the acceptance
// tolerance predicate.

#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "optsynth/model.hpp"

namespace optsynth {

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kTimeLimit, kError };

std::string_view to_string(SolveStatus status);
std::optional<SolveStatus> parse_solve_status(std::string_view text);

struct SolveOutcome {
  SolveStatus status = SolveStatus::kError;
  std::optional<double> objective;
  double solve_time = 0.0;  // seconds
  std::optional<std::map<std::string, double>> solution;
  // Free-form diagnostics: node counts, best bound, captured solver output.
  std::map<std::string, std::string> info;

  bool optimal() const { return status == SolveStatus::kOptimal; }
  nlohmann::json to_json() const;
};

struct SolverLimits {
  double time_limit = 60.0;  // seconds
  std::size_t node_limit = 1'000'000;
  double feasibility_tol = 1e-6;
  double integrality_tol = 1e-5;

  // Throws ConfigError when a tolerance is outside (0, 1e-3] or a limit is
  // not positive.
  void check() const;
};

struct DeskCap {
  std::size_t max_variables = 200;
  std::size_t max_constraints = 200;
};

// Exact solve for linear and mixed-integer linear models, including
// indicator rows. Throws CapabilityError for quadratic or general rows, a
// quadratic objective, or a model over the desk cap.
SolveOutcome solve_builtin(const ProblemData& pd, const SolverLimits& limits = {},
                           const DeskCap& cap = {});

// True iff |a - b| / (|b| + 1) < eps, with b the ground truth.
bool values_match(double a, double b, double eps = 1e-6);

struct ExternalSolverSpec {
  // Whitespace-separated argv, no shell. {input}, {output} and {timelimit}
  // are substituted inside each argument.
  std::string command_template;
  // ECMAScript regexes applied per line to the output file followed by the
  // captured stdout/stderr. Capture group 1 holds the value.
  std::string status_pattern = R"(^\s*status\s*:\s*(.+?)\s*$)";
  std::string objective_pattern = R"(^\s*objective\s*:\s*(\S+)\s*$)";
  // Two capture groups: LP column name and value. Empty disables.
  std::string solution_pattern = R"(^\s*var\s+(\S+)\s+(\S+)\s*$)";
  // Case-insensitive solver status text -> status.
  std::map<std::string, SolveStatus> status_mapping;
  std::size_t max_concurrent = 4;
  double kill_grace = 2.0;  // seconds past the time limit before SIGKILL
  bool keep_artifacts = false;
  std::filesystem::path work_dir;  // empty: system temp directory

  // Throws ConfigError unless the template contains {input} and the
  // patterns compile.
  void check() const;

  // Spec for tools/highs_lp_solve.py run through python3.
  static ExternalSolverSpec highs_runner(const std::filesystem::path& script);
};

SolveOutcome solve_external(const ProblemData& pd, const ExternalSolverSpec& spec,
                            const SolverLimits& limits = {});

enum class SolverMode { kAuto, kBuiltin, kExternal };

struct SolverConfig {
  SolverMode mode = SolverMode::kAuto;
  SolverLimits limits;
  DeskCap cap;
  std::optional<ExternalSolverSpec> external;
};

// kAuto picks the built-in solver when it can handle the model and falls back
// to the external adapter otherwise. Capability failures come back as an
// error outcome rather than an exception.
SolveOutcome solve(const ProblemData& pd, const SolverConfig& config);

// Whether solve_builtin accepts the model, with the reason when it does not.
std::optional<std::string> builtin_rejection(const ProblemData& pd, const DeskCap& cap = {});

// Maximum absolute violation of bounds, integrality and active rows.
double max_violation(const ProblemData& pd, const std::map<std::string, double>& solution);

}  // namespace optsynth
