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

// Exhaustive-enumeration oracle for pure-integer models with finite bounds.
// Deliberately independent of the library's solver and evaluation code.

#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "optsynth/model.hpp"

namespace optsynth::testing {

struct OracleResult {
  bool feasible = false;
  double objective = 0.0;
};

inline double oracle_eval(const Expression& e, const std::map<std::string, double>& x) {
  double total = 0.0;
  for (const auto& t : e.terms()) {
    double v = t.coefficient();
    for (const auto& f : t.factors()) {
      for (int k = 0; k < f.exponent; ++k) v *= x.at(f.variable);
    }
    total += v;
  }
  return total;
}

inline bool oracle_row_ok(const Constraint& c, const std::map<std::string, double>& x) {
  if (c.guard && x.at(c.guard->variable) != c.guard->value) return true;
  const double lhs = oracle_eval(c.body, x);
  const double tol = 1e-9 * (1.0 + std::abs(c.rhs));
  switch (c.relation) {
    case Relation::kLessEqual: return lhs <= c.rhs + tol;
    case Relation::kGreaterEqual: return lhs >= c.rhs - tol;
    case Relation::kEqual: return std::abs(lhs - c.rhs) <= tol;
  }
  return false;
}

// Requires every variable integral with finite bounds.
inline OracleResult enumerate_optimum(const ProblemData& pd) {
  const std::size_t n = pd.variables.size();
  std::vector<long> lo(n), hi(n), cur(n);
  for (std::size_t j = 0; j < n; ++j) {
    lo[j] = static_cast<long>(std::ceil(pd.variables[j].lower));
    hi[j] = static_cast<long>(std::floor(pd.variables[j].upper));
    cur[j] = lo[j];
  }
  const bool maximize = pd.sense == ObjectiveSense::kMaximize;
  OracleResult best;
  std::map<std::string, double> x;
  while (true) {
    for (std::size_t j = 0; j < n; ++j) x[pd.variables[j].name] = static_cast<double>(cur[j]);
    bool ok = true;
    for (const auto& c : pd.constraints) {
      if (!oracle_row_ok(c, x)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      const double v = oracle_eval(pd.objective, x);
      if (!best.feasible || (maximize ? v > best.objective : v < best.objective)) {
        best.feasible = true;
        best.objective = v;
      }
    }
    std::size_t j = 0;
    while (j < n && cur[j] == hi[j]) {
      cur[j] = lo[j];
      ++j;
    }
    if (j == n) break;
    ++cur[j];
  }
  return best;
}

}  // namespace optsynth::testing
