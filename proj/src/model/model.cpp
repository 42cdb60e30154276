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

#include "optsynth/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "optsynth/errors.hpp"

namespace optsynth {

Term::Term(double coefficient, std::vector<Factor> factors,
           std::optional<TranscendentalFactor> transcendental)
    : coefficient_(coefficient), transcendental_(std::move(transcendental)) {
  std::sort(factors.begin(), factors.end(),
            [](const Factor& a, const Factor& b) { return a.variable < b.variable; });
  for (auto& f : factors) {
    if (f.exponent < 1) {
      throw ValidationError("factor '" + f.variable +
                            "' has non-positive exponent " +
                            std::to_string(f.exponent));
    }
    if (!factors_.empty() && factors_.back().variable == f.variable) {
      factors_.back().exponent += f.exponent;
    } else {
      factors_.push_back(std::move(f));
    }
  }
}

int Term::degree() const {
  int d = transcendental_ ? 1 : 0;
  for (const auto& f : factors_) d += f.exponent;
  return d;
}

std::string_view Term::linear_variable() const {
  if (transcendental_ || factors_.size() != 1 || factors_[0].exponent != 1) {
    return {};
  }
  return factors_[0].variable;
}

std::string Term::signature() const {
  std::string key;
  for (const auto& f : factors_) {
    if (!key.empty()) key += '*';
    key += f.variable;
    if (f.exponent != 1) key += '^' + std::to_string(f.exponent);
  }
  if (transcendental_) {
    if (!key.empty()) key += '*';
    key += std::string(to_string(transcendental_->function)) + '(' +
           transcendental_->variable + ')';
  }
  return key;
}

Term Term::with_coefficient(double coefficient) const {
  Term t = *this;
  t.coefficient_ = coefficient;
  return t;
}

namespace {

bool same_monomial(const Term& a, const Term& b) {
  return a.factors() == b.factors() && a.transcendental() == b.transcendental();
}

}  // namespace

Expression::Expression(const std::vector<Term>& terms) {
  for (const auto& t : terms) add(t);
}

Expression Expression::constant(double value) {
  Expression e;
  e.add(Term::constant(value));
  return e;
}

Expression Expression::variable(std::string name, double coefficient) {
  Expression e;
  e.add(Term::linear(coefficient, std::move(name)));
  return e;
}

Expression& Expression::add(const Term& term) {
  if (term.coefficient() == 0.0) return *this;
  auto it = std::find_if(terms_.begin(), terms_.end(),
                         [&](const Term& t) { return same_monomial(t, term); });
  if (it == terms_.end()) {
    terms_.push_back(term);
    return *this;
  }
  const double merged = it->coefficient() + term.coefficient();
  if (merged == 0.0) {
    terms_.erase(it);
  } else {
    *it = it->with_coefficient(merged);
  }
  return *this;
}

Expression& Expression::add(const Expression& other, double scale) {
  for (const auto& t : other.terms_) {
    add(t.with_coefficient(t.coefficient() * scale));
  }
  return *this;
}

int Expression::degree() const {
  int d = 0;
  for (const auto& t : terms_) d = std::max(d, t.degree());
  return d;
}

bool Expression::has_transcendental() const {
  return std::any_of(terms_.begin(), terms_.end(),
                     [](const Term& t) { return t.transcendental().has_value(); });
}

double Expression::constant_part() const {
  for (const auto& t : terms_) {
    if (t.is_constant()) return t.coefficient();
  }
  return 0.0;
}

Expression Expression::without_constant() const {
  Expression e;
  for (const auto& t : terms_) {
    if (!t.is_constant()) e.terms_.push_back(t);
  }
  return e;
}

Expression Expression::scaled(double factor) const {
  Expression e;
  e.add(*this, factor);
  return e;
}

double Expression::linear_coefficient(std::string_view name) const {
  for (const auto& t : terms_) {
    if (t.linear_variable() == name) return t.coefficient();
  }
  return 0.0;
}

Constraint Constraint::from_sides(std::string name, const Expression& lhs,
                                  Relation relation, const Expression& rhs) {
  Constraint c;
  c.name = std::move(name);
  c.body = lhs - rhs;
  c.relation = relation;
  c.rhs = 0.0;
  return c;
}

const Variable* ProblemData::find_variable(std::string_view name) const {
  for (const auto& v : variables) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

std::size_t ProblemData::count_variables(VariableKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(variables.begin(), variables.end(),
                    [kind](const Variable& v) { return v.kind == kind; }));
}

namespace {

void collect_variables(const Expression& e, std::vector<std::string>& out) {
  for (const auto& t : e.terms()) {
    for (const auto& f : t.factors()) out.push_back(f.variable);
    if (t.transcendental()) out.push_back(t.transcendental()->variable);
  }
}

std::string constraint_location(const Constraint& c) {
  return "constraint '" + c.name + "'";
}

}  // namespace

ProblemData normalize(const ProblemData& pd) {
  std::unordered_set<std::string> declared;
  for (const auto& v : pd.variables) declared.insert(v.name);

  auto check = [&](const Expression& e, const std::string& where) {
    std::vector<std::string> used;
    collect_variables(e, used);
    for (const auto& name : used) {
      if (!declared.count(name)) {
        throw ValidationError(where + " references unknown variable '" + name + "'");
      }
    }
  };

  ProblemData out = pd;
  check(pd.objective, "objective");
  out.objective = Expression(pd.objective.terms());
  for (auto& c : out.constraints) {
    check(c.body, constraint_location(c));
    if (c.guard && !declared.count(c.guard->variable)) {
      throw ValidationError(constraint_location(c) +
                            " is guarded by unknown variable '" +
                            c.guard->variable + "'");
    }
    const Expression merged(c.body.terms());
    c.rhs -= merged.constant_part();
    if (c.rhs == 0.0) c.rhs = 0.0;  // drop negative zero
    c.body = merged.without_constant();
  }
  return out;
}

ConstraintKind classify(const Constraint& c) {
  if (c.guard) return ConstraintKind::kIndicator;
  if (c.body.has_transcendental() || c.body.degree() > 2) {
    return ConstraintKind::kGeneral;
  }
  if (c.body.degree() == 2) return ConstraintKind::kQuadratic;
  return ConstraintKind::kLinear;
}

std::vector<Diagnostic> validate(const ProblemData& pd) {
  std::vector<Diagnostic> out;
  auto emit = [&](std::string code, std::string location, std::string message) {
    out.push_back({std::move(code), std::move(location), std::move(message)});
  };

  if (pd.variables.empty()) {
    emit("no-variables", "problem", "problem declares no variables");
  }

  std::unordered_map<std::string, const Variable*> by_name;
  for (const auto& v : pd.variables) {
    const std::string where = "variable '" + v.name + "'";
    if (v.name.empty()) emit("empty-name", where, "variable has an empty name");
    if (!by_name.emplace(v.name, &v).second) {
      emit("duplicate-variable", where, "variable declared more than once");
    }
    if (std::isnan(v.lower) || std::isnan(v.upper)) {
      emit("bound-nan", where, "bound is NaN");
    } else if (v.lower > v.upper) {
      emit("bound-order", where,
           "lower bound " + format_number(v.lower) + " exceeds upper bound " +
               format_number(v.upper));
    }
    if (v.kind == VariableKind::kBinary && (v.lower < 0.0 || v.upper > 1.0)) {
      emit("binary-domain", where, "bound violates binary domain [0, 1]");
    }
  }

  auto check_expression = [&](const Expression& e, const std::string& where) {
    std::set<std::string> seen_signatures;
    for (const auto& t : e.terms()) {
      if (!std::isfinite(t.coefficient())) {
        emit("non-finite", where, "term coefficient is not finite");
      }
      if (!seen_signatures.insert(t.signature()).second) {
        emit("duplicate-term", where, "term '" + t.signature() + "' appears twice");
      }
    }
    std::vector<std::string> used;
    collect_variables(e, used);
    std::set<std::string> reported;
    for (const auto& name : used) {
      if (!by_name.count(name) && reported.insert(name).second) {
        emit("unknown-variable", where, "unknown variable '" + name + "'");
      }
    }
  };

  check_expression(pd.objective, "objective");

  std::set<std::string> constraint_names;
  for (const auto& c : pd.constraints) {
    const std::string where = constraint_location(c);
    if (c.name.empty()) emit("empty-name", where, "constraint has an empty name");
    if (!constraint_names.insert(c.name).second) {
      emit("duplicate-constraint", where, "constraint name used more than once");
    }
    if (!std::isfinite(c.rhs)) emit("non-finite", where, "rhs is not finite");
    check_expression(c.body, where);
    for (const auto* guard : {&c.guard, &c.big_m_origin}) {
      if (!*guard) continue;
      const auto& g = **guard;
      auto it = by_name.find(g.variable);
      if (it == by_name.end()) {
        emit("unknown-variable", where, "unknown guard variable '" + g.variable + "'");
      } else if (it->second->kind != VariableKind::kBinary) {
        emit("guard-not-binary", where, "guard variable '" + g.variable + "' is not binary");
      }
      if (g.value != 0 && g.value != 1) {
        emit("guard-value", where, "guard activation value must be 0 or 1");
      }
    }
    if (c.guard) {
      std::vector<std::string> used;
      collect_variables(c.body, used);
      if (std::find(used.begin(), used.end(), c.guard->variable) != used.end()) {
        emit("guard-in-body", where, "guard variable appears in the constraint body");
      }
    }
  }
  return out;
}

namespace {

std::map<std::string, double> term_map(const Expression& e) {
  std::map<std::string, double> m;
  for (const auto& t : e.terms()) m[t.signature()] += t.coefficient();
  return m;
}

}  // namespace

std::string structural_difference(const ProblemData& a, const ProblemData& b) {
  if (a.name != b.name) return "name '" + a.name + "' vs '" + b.name + "'";
  if (a.sense != b.sense) return "objective sense differs";
  if (term_map(a.objective) != term_map(b.objective)) return "objective differs";
  if (a.variables.size() != b.variables.size()) {
    return "variable count " + std::to_string(a.variables.size()) + " vs " +
           std::to_string(b.variables.size());
  }
  for (const auto& va : a.variables) {
    const Variable* vb = b.find_variable(va.name);
    if (!vb) return "variable '" + va.name + "' missing";
    if (!(va == *vb)) return "variable '" + va.name + "' differs";
  }
  if (a.constraints.size() != b.constraints.size()) {
    return "constraint count " + std::to_string(a.constraints.size()) + " vs " +
           std::to_string(b.constraints.size());
  }
  for (std::size_t i = 0; i < a.constraints.size(); ++i) {
    const auto& ca = a.constraints[i];
    const auto& cb = b.constraints[i];
    if (ca.name != cb.name || ca.relation != cb.relation || ca.rhs != cb.rhs ||
        ca.guard != cb.guard || ca.big_m_origin != cb.big_m_origin ||
        term_map(ca.body) != term_map(cb.body)) {
      return "constraint '" + ca.name + "' differs";
    }
  }
  return {};
}

bool structurally_equal(const ProblemData& a, const ProblemData& b) {
  return structural_difference(a, b).empty();
}

bool is_mixed_integer_linear(const ProblemData& pd) {
  if (!pd.objective.is_linear()) return false;
  return std::all_of(pd.constraints.begin(), pd.constraints.end(),
                     [](const Constraint& c) { return c.body.is_linear(); });
}

namespace {

std::string math_name(std::string_view name) {
  std::string out = "\\mathit{";
  for (char ch : name) {
    if (ch == '_') out += "\\_";
    else out += ch;
  }
  return out + "}";
}

std::string math_term(const Term& t, bool first) {
  std::string out;
  double c = t.coefficient();
  if (first) {
    if (c < 0) out += "-";
  } else {
    out += c < 0 ? " - " : " + ";
  }
  c = std::abs(c);
  std::string body;
  for (const auto& f : t.factors()) {
    if (!body.empty()) body += " \\cdot ";
    body += math_name(f.variable);
    if (f.exponent != 1) body += "^{" + std::to_string(f.exponent) + "}";
  }
  if (t.transcendental()) {
    if (!body.empty()) body += " \\cdot ";
    body += "\\" + std::string(to_string(t.transcendental()->function)) + "(" +
            math_name(t.transcendental()->variable) + ")";
  }
  if (body.empty()) return out + format_number(c);
  if (c != 1.0) out += format_number(c) + " ";
  return out + body;
}

std::string math_expression(const Expression& e) {
  if (e.empty()) return "0";
  std::string out;
  for (std::size_t i = 0; i < e.terms().size(); ++i) {
    out += math_term(e.terms()[i], i == 0);
  }
  return out;
}

std::string_view math_relation(Relation r) {
  switch (r) {
    case Relation::kLessEqual: return "\\le";
    case Relation::kEqual: return "=";
    case Relation::kGreaterEqual: return "\\ge";
  }
  return "=";
}

}  // namespace

double evaluate(const Expression& e, const std::map<std::string, double>& values) {
  auto lookup = [&](const std::string& name) {
    auto it = values.find(name);
    if (it == values.end()) throw ValidationError("no value for variable '" + name + "'");
    return it->second;
  };
  double total = 0.0;
  for (const auto& t : e.terms()) {
    double v = t.coefficient();
    for (const auto& f : t.factors()) v *= std::pow(lookup(f.variable), f.exponent);
    if (const auto& tr = t.transcendental()) {
      const double arg = lookup(tr->variable);
      switch (tr->function) {
        case TranscendentalFunction::kExp: v *= std::exp(arg); break;
        case TranscendentalFunction::kLog: v *= std::log(arg); break;
        case TranscendentalFunction::kSin: v *= std::sin(arg); break;
        case TranscendentalFunction::kCos: v *= std::cos(arg); break;
      }
    }
    total += v;
  }
  return total;
}

std::string render_math(const ProblemData& pd) {
  std::ostringstream os;
  os << "\\begin{aligned}\n";
  os << (pd.sense == ObjectiveSense::kMinimize ? "\\min" : "\\max") << "\\quad & "
     << math_expression(pd.objective) << " \\\\\n";
  bool first = true;
  for (const auto& c : pd.constraints) {
    os << (first ? "\\text{s.t.}\\quad & " : " & ");
    first = false;
    if (c.guard) {
      os << math_name(c.guard->variable) << " = " << c.guard->value
         << " \\Rightarrow ";
    }
    os << math_expression(c.body) << " " << math_relation(c.relation) << " "
       << format_number(c.rhs) << " && (" << c.name << ") \\\\\n";
  }
  for (const auto& v : pd.variables) {
    os << " & " << math_name(v.name) << " \\in ";
    switch (v.kind) {
      case VariableKind::kBinary: os << "\\{0, 1\\}"; break;
      case VariableKind::kInteger: os << "\\mathbb{Z}"; break;
      case VariableKind::kContinuous: os << "\\mathbb{R}"; break;
    }
    if (std::isfinite(v.lower) || std::isfinite(v.upper)) {
      os << ",\\ " << (std::isfinite(v.lower) ? format_number(v.lower) : "-\\infty")
         << " \\le " << math_name(v.name) << " \\le "
         << (std::isfinite(v.upper) ? format_number(v.upper) : "\\infty");
    }
    os << " \\\\\n";
  }
  os << "\\end{aligned}";
  return os.str();
}

std::string_view to_string(VariableKind kind) {
  switch (kind) {
    case VariableKind::kBinary: return "binary";
    case VariableKind::kInteger: return "integer";
    case VariableKind::kContinuous: return "continuous";
  }
  return "continuous";
}

std::string_view to_string(Relation relation) {
  switch (relation) {
    case Relation::kLessEqual: return "<=";
    case Relation::kEqual: return "=";
    case Relation::kGreaterEqual: return ">=";
  }
  return "=";
}

std::string_view to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::kLinear: return "linear";
    case ConstraintKind::kIndicator: return "indicator";
    case ConstraintKind::kQuadratic: return "quadratic";
    case ConstraintKind::kGeneral: return "general";
  }
  return "linear";
}

std::string_view to_string(ObjectiveSense sense) {
  return sense == ObjectiveSense::kMinimize ? "minimize" : "maximize";
}

std::string_view to_string(TranscendentalFunction function) {
  switch (function) {
    case TranscendentalFunction::kExp: return "exp";
    case TranscendentalFunction::kLog: return "log";
    case TranscendentalFunction::kSin: return "sin";
    case TranscendentalFunction::kCos: return "cos";
  }
  return "exp";
}

std::optional<VariableKind> parse_variable_kind(std::string_view text) {
  if (text == "binary") return VariableKind::kBinary;
  if (text == "integer") return VariableKind::kInteger;
  if (text == "continuous") return VariableKind::kContinuous;
  return std::nullopt;
}

std::optional<Relation> parse_relation(std::string_view text) {
  if (text == "<=" || text == "=<" || text == "<") return Relation::kLessEqual;
  if (text == ">=" || text == "=>" || text == ">") return Relation::kGreaterEqual;
  if (text == "=" || text == "==") return Relation::kEqual;
  return std::nullopt;
}

std::optional<ObjectiveSense> parse_sense(std::string_view text) {
  if (text == "minimize" || text == "min") return ObjectiveSense::kMinimize;
  if (text == "maximize" || text == "max") return ObjectiveSense::kMaximize;
  return std::nullopt;
}

std::optional<TranscendentalFunction> parse_transcendental(std::string_view text) {
  if (text == "exp") return TranscendentalFunction::kExp;
  if (text == "log") return TranscendentalFunction::kLog;
  if (text == "sin") return TranscendentalFunction::kSin;
  if (text == "cos") return TranscendentalFunction::kCos;
  return std::nullopt;
}

std::string format_number(double value) {
  if (value == 0.0) return "0";
  return fmt::format("{}", value);
}

}  // namespace optsynth
