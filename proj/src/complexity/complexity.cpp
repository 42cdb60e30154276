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

#include "optsynth/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "optsynth/errors.hpp"

namespace optsynth {

std::array<double, 9> ComplexityWeights::as_array() const {
  return {alpha_bin, alpha_int, alpha_cont, beta_lin, beta_indic,
          beta_quad, beta_gen, gamma_bigm, delta_expr};
}

ComplexityWeights ComplexityWeights::scaled(double factor) const {
  ComplexityWeights w = *this;
  for (double* p : {&w.alpha_bin, &w.alpha_int, &w.alpha_cont, &w.beta_lin,
                    &w.beta_indic, &w.beta_quad, &w.beta_gen, &w.gamma_bigm,
                    &w.delta_expr}) {
    *p *= factor;
  }
  return w;
}

void ComplexityWeights::check() const {
  for (double w : as_array()) {
    if (!std::isfinite(w) || w < 0.0) {
      throw ConfigError("complexity weights must be finite and non-negative");
    }
  }
}

std::array<double, 9> ComplexityReport::components() const {
  return {static_cast<double>(n_bin),  static_cast<double>(n_int),
          static_cast<double>(n_cont), static_cast<double>(n_lin),
          static_cast<double>(n_indic), static_cast<double>(n_quad),
          static_cast<double>(n_gen),  static_cast<double>(f_bigm),
          avg_terms};
}

nlohmann::json ComplexityReport::to_json() const {
  return {{"n_bin", n_bin},   {"n_int", n_int},   {"n_cont", n_cont},
          {"n_lin", n_lin},   {"n_indic", n_indic}, {"n_quad", n_quad},
          {"n_gen", n_gen},   {"f_bigm", f_bigm}, {"avg_terms", avg_terms},
          {"score", score}};
}

std::vector<DifficultyTier> default_tiers() {
  return {{"easy", 25, 75},
          {"medium_easy", 50, 100},
          {"medium", 75, 125},
          {"medium_hard", 100, 150},
          {"hard", 125, 175}};
}

std::size_t count_bigm(const ProblemData& pd, double threshold) {
  std::size_t count = 0;
  for (const auto& c : pd.constraints) {
    if (classify(c) != ConstraintKind::kLinear) continue;
    bool big_binary = false;
    bool other = false;
    for (const auto& t : c.body.terms()) {
      const auto name = t.linear_variable();
      if (name.empty()) continue;
      const Variable* v = pd.find_variable(name);
      const bool binary = v && v->kind == VariableKind::kBinary;
      if (binary && std::abs(t.coefficient()) >= threshold) big_binary = true;
      if (!binary) other = true;
    }
    if (big_binary && other) ++count;
  }
  return count;
}

double avg_expression_terms(const ProblemData& pd) {
  if (pd.constraints.empty() && pd.objective.empty()) {
    throw ValidationError(
        "average term count is undefined without constraints or objective terms");
  }
  std::size_t terms = pd.objective.size();
  for (const auto& c : pd.constraints) {
    terms += c.body.without_constant().size();
    const double constant = c.rhs - c.body.constant_part();
    if (constant != 0.0) ++terms;
  }
  return static_cast<double>(terms) / static_cast<double>(pd.constraints.size() + 1);
}

ComplexityReport score(const ProblemData& pd, const ComplexityWeights& weights,
                       double bigm_threshold) {
  weights.check();
  ComplexityReport r;
  r.n_bin = pd.count_variables(VariableKind::kBinary);
  r.n_int = pd.count_variables(VariableKind::kInteger);
  r.n_cont = pd.count_variables(VariableKind::kContinuous);
  for (const auto& c : pd.constraints) {
    if (c.guard || c.big_m_origin) {
      ++r.n_indic;
      continue;
    }
    switch (classify(c)) {
      case ConstraintKind::kLinear: ++r.n_lin; break;
      case ConstraintKind::kQuadratic: ++r.n_quad; break;
      case ConstraintKind::kGeneral: ++r.n_gen; break;
      case ConstraintKind::kIndicator: ++r.n_indic; break;
    }
  }
  r.f_bigm = count_bigm(pd, bigm_threshold);
  r.avg_terms = avg_expression_terms(pd);
  const auto c = r.components();
  const auto w = weights.as_array();
  r.score = std::inner_product(c.begin(), c.end(), w.begin(), 0.0);
  return r;
}

std::vector<DifficultyTier> tier_of(double s, const std::vector<DifficultyTier>& tiers) {
  std::vector<DifficultyTier> out;
  for (const auto& t : tiers) {
    if (t.contains(s)) out.push_back(t);
  }
  return out;
}

std::vector<std::string> tier_names(double s, const std::vector<DifficultyTier>& tiers) {
  std::vector<std::string> out;
  for (const auto& t : tier_of(s, tiers)) out.push_back(t.name);
  return out;
}

namespace {

Constraint expand_one(const Constraint& c, Relation relation, double big_m,
                      std::string name) {
  // Literal l is y when the guard activates on 1 and (1 - y) on 0; the row
  // must hold when l = 1 and is relaxed by M otherwise.
  const auto& g = *c.guard;
  Constraint out;
  out.name = std::move(name);
  out.body = c.body;
  out.relation = relation;
  out.rhs = c.rhs;
  out.big_m_origin = g;
  const double dir = relation == Relation::kLessEqual ? 1.0 : -1.0;
  if (g.value == 1) {
    // a.x <= b + M (1 - y)   |   a.x >= b - M (1 - y)
    out.body.add(Term::linear(dir * big_m, g.variable));
    out.rhs += dir * big_m;
  } else {
    // a.x <= b + M y         |   a.x >= b - M y
    out.body.add(Term::linear(-dir * big_m, g.variable));
  }
  return out;
}

}  // namespace

ProblemData big_m_expand(const ProblemData& pd, double big_m) {
  if (!(big_m > 0.0) || !std::isfinite(big_m)) {
    throw ConfigError("big-M constant must be positive and finite");
  }
  ProblemData out = pd;
  out.constraints.clear();
  for (const auto& c : pd.constraints) {
    if (!c.guard) {
      out.constraints.push_back(c);
      continue;
    }
    if (c.relation == Relation::kEqual) {
      out.constraints.push_back(expand_one(c, Relation::kLessEqual, big_m, c.name + "_le"));
      out.constraints.push_back(expand_one(c, Relation::kGreaterEqual, big_m, c.name + "_ge"));
    } else {
      out.constraints.push_back(expand_one(c, c.relation, big_m, c.name));
    }
  }
  return out;
}

ComplexityWeights weights_from_config(const KeyValues& kv) {
  ComplexityWeights w;
  w.alpha_bin = kv_number(kv, "alpha_bin", w.alpha_bin);
  w.alpha_int = kv_number(kv, "alpha_int", w.alpha_int);
  w.alpha_cont = kv_number(kv, "alpha_cont", w.alpha_cont);
  w.beta_lin = kv_number(kv, "beta_lin", w.beta_lin);
  w.beta_indic = kv_number(kv, "beta_indic", w.beta_indic);
  w.beta_quad = kv_number(kv, "beta_quad", w.beta_quad);
  w.beta_gen = kv_number(kv, "beta_gen", w.beta_gen);
  w.gamma_bigm = kv_number(kv, "gamma_bigm", w.gamma_bigm);
  w.delta_expr = kv_number(kv, "delta_expr", w.delta_expr);
  w.check();
  return w;
}

std::vector<DifficultyTier> tiers_from_config(const KeyValues& kv) {
  std::vector<DifficultyTier> tiers;
  for (const auto& [key, value] : kv) {
    if (key.rfind("tier.", 0) != 0) continue;
    const auto comma = value.find(',');
    if (comma == std::string::npos) {
      throw ConfigError("'" + key + "' must be 'low, high'");
    }
    DifficultyTier t;
    t.name = key.substr(5);
    try {
      t.low = std::stod(value.substr(0, comma));
      t.high = std::stod(value.substr(comma + 1));
    } catch (const std::exception&) {
      throw ConfigError("'" + key + "' must be 'low, high'");
    }
    if (t.low > t.high) throw ConfigError("'" + key + "' has low > high");
    tiers.push_back(std::move(t));
  }
  if (tiers.empty()) return default_tiers();
  std::sort(tiers.begin(), tiers.end(), [](const auto& a, const auto& b) {
    return a.low != b.low ? a.low < b.low : a.name < b.name;
  });
  return tiers;
}

}  // namespace optsynth
