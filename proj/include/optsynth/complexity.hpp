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

// Modeling-complexity score of an instance and the difficulty tiers built on
// top of it:
//
//   S = a_bin N_bin + a_int N_int + a_cont N_cont
//     + b_lin N_lin + b_indic N_indic + b_quad N_quad + b_gen N_gen
//     + g_bigm f_bigm + d_expr L_expr
//
// L_expr counts, for every constraint, the nonzero additive terms of
// (body - rhs) and, for the objective, its nonzero terms; a product of
// factors is a single term. The mean is taken over constraints + objective.

#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "optsynth/kv_config.hpp"
#include "optsynth/model.hpp"

namespace optsynth {

inline constexpr double kDefaultBigMThreshold = 100.0;

struct ComplexityWeights {
  double alpha_bin = 1.0;
  double alpha_int = 1.0;
  double alpha_cont = 1.0;
  double beta_lin = 1.0;
  double beta_indic = 1.0;
  double beta_quad = 1.0;
  double beta_gen = 1.0;
  double gamma_bigm = 1.0;
  double delta_expr = 1.0;

  // Order matches ComplexityReport::components().
  std::array<double, 9> as_array() const;
  ComplexityWeights scaled(double factor) const;
  // Throws ConfigError unless every weight is finite and non-negative.
  void check() const;
};

struct ComplexityReport {
  std::size_t n_bin = 0;
  std::size_t n_int = 0;
  std::size_t n_cont = 0;
  std::size_t n_lin = 0;
  std::size_t n_indic = 0;
  std::size_t n_quad = 0;
  std::size_t n_gen = 0;
  std::size_t f_bigm = 0;
  double avg_terms = 0.0;
  double score = 0.0;

  std::array<double, 9> components() const;
  nlohmann::json to_json() const;
};

struct DifficultyTier {
  std::string name;
  double low = 0.0;   // closed interval [low, high]
  double high = 0.0;

  bool contains(double s) const { return low <= s && s <= high; }
};

// easy [25,75], medium_easy [50,100], medium [75,125], medium_hard [100,150],
// hard [125,175].
std::vector<DifficultyTier> default_tiers();

// Linear rows mixing a binary term with |coefficient| >= threshold and at
// least one non-binary term. Guarded (unexpanded) indicator rows count 0.
std::size_t count_bigm(const ProblemData& pd, double threshold = kDefaultBigMThreshold);

// Throws ValidationError when there are no constraints and the objective is
// empty.
double avg_expression_terms(const ProblemData& pd);

// Counts indicator rows as n_indic whether they are still guarded or were
// expanded by big_m_expand(); every other row by classify().
ComplexityReport score(const ProblemData& pd, const ComplexityWeights& weights = {},
                       double bigm_threshold = kDefaultBigMThreshold);

// All tiers whose closed interval contains `s`, in table order.
std::vector<DifficultyTier> tier_of(double s, const std::vector<DifficultyTier>& tiers);
std::vector<std::string> tier_names(double s, const std::vector<DifficultyTier>& tiers);

// Rewrites each guarded row `y = v -> a.x rel b` into Big-M linear form and
// records the guard in Constraint::big_m_origin. Equality rows split into a
// `_le` and a `_ge` row.
ProblemData big_m_expand(const ProblemData& pd, double big_m);

// Keys: alpha_bin ... delta_expr. Missing keys keep their defaults.
ComplexityWeights weights_from_config(const KeyValues& kv);
// Keys: tier.<name> = low, high. Returns default_tiers() when none present.
std::vector<DifficultyTier> tiers_from_config(const KeyValues& kv);

}  // namespace optsynth
