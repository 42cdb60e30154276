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

// Dense bounded-variable primal simplex used by the branch-and-bound driver.

#pragma once

#include <chrono>
#include <optional>
#include <utility>
#include <vector>

#include "optsynth/model.hpp"

namespace optsynth::detail {

struct LpRow {
  std::vector<std::pair<int, double>> coefs;
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
};

// min c.x subject to rows and lo <= x <= hi.
struct LpProblem {
  std::vector<double> cost;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<const LpRow*> rows;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kLimit };

struct LpResult {
  LpStatus status = LpStatus::kLimit;
  double objective = 0.0;
  std::vector<double> x;
  std::size_t iterations = 0;
};

struct LpOptions {
  double feasibility_tol = 1e-6;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

LpResult solve_lp(const LpProblem& lp, const LpOptions& options);

}  // namespace optsynth::detail
