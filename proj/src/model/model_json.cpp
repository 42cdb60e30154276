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

#include "optsynth/model_json.hpp"

#include <cmath>

#include "optsynth/errors.hpp"

namespace optsynth {

using nlohmann::json;

namespace {

json bound_to_json(double value) {
  if (value == kInfinity) return "inf";
  if (value == -kInfinity) return "-inf";
  return value;
}

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw ParseError("model schema: " + path + ": " + what, 0, 0);
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path, std::string("missing field '") + key + "'");
  return *it;
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) schema_error(path, "expected a string");
  return v.get<std::string>();
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  return v.get<double>();
}

double bound_from_json(const json& v, const std::string& path) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "infinity" || s == "+infinity") return kInfinity;
    if (s == "-inf" || s == "-infinity") return -kInfinity;
    schema_error(path, "unrecognized bound '" + s + "'");
  }
  return as_number(v, path);
}

Term term_from_json(const json& v, const std::string& path) {
  if (v.is_number()) return Term::constant(v.get<double>());
  const double coefficient = as_number(require(v, "coefficient", path), path + ".coefficient");
  std::vector<Factor> factors;
  if (auto it = v.find("factors"); it != v.end()) {
    if (!it->is_array()) schema_error(path + ".factors", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& f = (*it)[i];
      const std::string fpath = path + ".factors[" + std::to_string(i) + "]";
      if (f.is_string()) {
        factors.push_back({f.get<std::string>(), 1});
        continue;
      }
      Factor factor;
      factor.variable = as_string(require(f, "variable", fpath), fpath + ".variable");
      if (auto e = f.find("exponent"); e != f.end()) {
        if (!e->is_number_integer() || e->get<int>() < 1) {
          schema_error(fpath + ".exponent", "expected a positive integer");
        }
        factor.exponent = e->get<int>();
      }
      factors.push_back(std::move(factor));
    }
  }
  std::optional<TranscendentalFactor> tf;
  if (auto it = v.find("transcendental"); it != v.end() && !it->is_null()) {
    const std::string tpath = path + ".transcendental";
    auto fn = parse_transcendental(as_string(require(*it, "function", tpath), tpath));
    if (!fn) schema_error(tpath + ".function", "expected one of exp, log, sin, cos");
    tf = TranscendentalFactor{*fn, as_string(require(*it, "variable", tpath), tpath)};
  }
  try {
    return Term(coefficient, std::move(factors), std::move(tf));
  } catch (const ValidationError& e) {
    schema_error(path, e.what());
  }
}

Expression expression_from_json(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array of terms");
  Expression e;
  for (std::size_t i = 0; i < v.size(); ++i) {
    e.add(term_from_json(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return e;
}

std::optional<IndicatorGuard> guard_from_json(const json& obj, const char* key,
                                              const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  const std::string gpath = path + "." + key;
  IndicatorGuard g;
  g.variable = as_string(require(*it, "variable", gpath), gpath + ".variable");
  const json& value = require(*it, "value", gpath);
  if (!value.is_number_integer()) schema_error(gpath + ".value", "expected 0 or 1");
  g.value = value.get<int>();
  return g;
}

json guard_to_json(const IndicatorGuard& g) {
  return {{"variable", g.variable}, {"value", g.value}};
}

}  // namespace

json to_json(const Expression& e) {
  json terms = json::array();
  for (const auto& t : e.terms()) {
    json term = {{"coefficient", t.coefficient()}};
    json factors = json::array();
    for (const auto& f : t.factors()) {
      factors.push_back({{"variable", f.variable}, {"exponent", f.exponent}});
    }
    term["factors"] = std::move(factors);
    if (t.transcendental()) {
      term["transcendental"] = {
          {"function", std::string(to_string(t.transcendental()->function))},
          {"variable", t.transcendental()->variable}};
    }
    terms.push_back(std::move(term));
  }
  return terms;
}

json to_json(const ProblemData& pd) {
  json doc;
  doc["name"] = pd.name;
  doc["sense"] = std::string(to_string(pd.sense));
  doc["objective"] = to_json(pd.objective);
  json vars = json::array();
  for (const auto& v : pd.variables) {
    vars.push_back({{"name", v.name},
                    {"kind", std::string(to_string(v.kind))},
                    {"lower", bound_to_json(v.lower)},
                    {"upper", bound_to_json(v.upper)}});
  }
  doc["variables"] = std::move(vars);
  json cons = json::array();
  for (const auto& c : pd.constraints) {
    json jc = {{"name", c.name},
               {"body", to_json(c.body)},
               {"relation", std::string(to_string(c.relation))},
               {"rhs", c.rhs}};
    if (c.guard) jc["guard"] = guard_to_json(*c.guard);
    if (c.big_m_origin) jc["big_m_origin"] = guard_to_json(*c.big_m_origin);
    cons.push_back(std::move(jc));
  }
  doc["constraints"] = std::move(cons);
  doc["metadata"] = pd.metadata;
  return doc;
}

ProblemData problem_from_json(const json& doc) {
  if (!doc.is_object()) schema_error("$", "expected an object");
  ProblemData pd;
  if (auto it = doc.find("name"); it != doc.end()) pd.name = as_string(*it, "$.name");
  auto sense = parse_sense(as_string(require(doc, "sense", "$"), "$.sense"));
  if (!sense) schema_error("$.sense", "expected 'minimize' or 'maximize'");
  pd.sense = *sense;
  pd.objective = expression_from_json(require(doc, "objective", "$"), "$.objective");

  const json& vars = require(doc, "variables", "$");
  if (!vars.is_array()) schema_error("$.variables", "expected an array");
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const std::string path = "$.variables[" + std::to_string(i) + "]";
    Variable v;
    v.name = as_string(require(vars[i], "name", path), path + ".name");
    auto kind = parse_variable_kind(as_string(require(vars[i], "kind", path), path + ".kind"));
    if (!kind) schema_error(path + ".kind", "expected binary, integer or continuous");
    v.kind = *kind;
    v.lower = 0.0;
    v.upper = v.kind == VariableKind::kBinary ? 1.0 : kInfinity;
    if (auto it = vars[i].find("lower"); it != vars[i].end()) {
      v.lower = bound_from_json(*it, path + ".lower");
    }
    if (auto it = vars[i].find("upper"); it != vars[i].end()) {
      v.upper = bound_from_json(*it, path + ".upper");
    }
    pd.variables.push_back(std::move(v));
  }

  if (auto it = doc.find("constraints"); it != doc.end()) {
    if (!it->is_array()) schema_error("$.constraints", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& jc = (*it)[i];
      const std::string path = "$.constraints[" + std::to_string(i) + "]";
      Constraint c;
      c.name = as_string(require(jc, "name", path), path + ".name");
      c.body = expression_from_json(require(jc, "body", path), path + ".body");
      const std::string rel = as_string(require(jc, "relation", path), path + ".relation");
      auto relation = parse_relation(rel);
      if (!relation) schema_error(path + ".relation", "unrecognized relation '" + rel + "'");
      c.relation = *relation;
      c.rhs = as_number(require(jc, "rhs", path), path + ".rhs");
      c.guard = guard_from_json(jc, "guard", path);
      c.big_m_origin = guard_from_json(jc, "big_m_origin", path);
      pd.constraints.push_back(std::move(c));
    }
  }

  if (auto it = doc.find("metadata"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) schema_error("$.metadata", "expected an object");
    for (const auto& [k, v] : it->items()) {
      pd.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
  }
  return pd;
}

ProblemData problem_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model schema: ") + e.what(), 0, 0);
  }
  return problem_from_json(doc);
}

std::string to_json_text(const ProblemData& pd, int indent) {
  return to_json(pd).dump(indent);
}

}  // namespace optsynth
