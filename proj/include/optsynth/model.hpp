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

// Canonical in-memory representation of an optimization problem:
//
//   min/max  g(x)
//   s.t.     c_i(x) {<=, =, >=} b_i        (optionally guarded by y = v ->)
//            l <= x <= u,  x_j integral for integer and binary variables
//
// Everything here is a plain value type. Constraints may carry constants and
// variable terms on either side while being built; normalize() moves the
// problem into the form every other component expects.

#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace optsynth {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class VariableKind { kBinary, kInteger, kContinuous };

struct Variable {
  std::string name;
  VariableKind kind = VariableKind::kContinuous;
  double lower = 0.0;
  double upper = kInfinity;

  bool is_integral() const { return kind != VariableKind::kContinuous; }
  friend bool operator==(const Variable&, const Variable&) = default;
};

enum class TranscendentalFunction { kExp, kLog, kSin, kCos };

struct Factor {
  std::string variable;
  int exponent = 1;
  friend bool operator==(const Factor&, const Factor&) = default;
};

// f(v) multiplied into a term, e.g. the e^{x2} in x1 * e^{x2}.
struct TranscendentalFactor {
  TranscendentalFunction function = TranscendentalFunction::kExp;
  std::string variable;
  friend bool operator==(const TranscendentalFactor&,
                         const TranscendentalFactor&) = default;
};

// coefficient * prod(variable^exponent) [* f(variable)].
// Factors are kept sorted by variable name with repeated variables merged.
class Term {
 public:
  Term() = default;
  Term(double coefficient, std::vector<Factor> factors,
       std::optional<TranscendentalFactor> transcendental = std::nullopt);

  static Term constant(double value) { return Term(value, {}); }
  static Term linear(double coefficient, std::string variable) {
    return Term(coefficient, {Factor{std::move(variable), 1}});
  }

  double coefficient() const { return coefficient_; }
  const std::vector<Factor>& factors() const { return factors_; }
  const std::optional<TranscendentalFactor>& transcendental() const {
    return transcendental_;
  }

  bool is_constant() const { return factors_.empty() && !transcendental_; }
  // Sum of polynomial exponents; a transcendental factor adds one.
  int degree() const;
  // Variable name of a degree-one polynomial term, empty otherwise.
  std::string_view linear_variable() const;
  // Key used to merge like terms.
  std::string signature() const;

  Term with_coefficient(double coefficient) const;

  friend bool operator==(const Term&, const Term&) = default;

 private:
  double coefficient_ = 0.0;
  std::vector<Factor> factors_;
  std::optional<TranscendentalFactor> transcendental_;
};

// Sum of terms. Like terms merge on insertion and terms whose coefficient
// cancels to zero are dropped; insertion order is otherwise preserved.
class Expression {
 public:
  Expression() = default;
  explicit Expression(const std::vector<Term>& terms);

  static Expression constant(double value);
  static Expression variable(std::string name, double coefficient = 1.0);

  Expression& add(const Term& term);
  Expression& add(const Expression& other, double scale = 1.0);

  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  int degree() const;
  bool has_transcendental() const;
  bool is_linear() const { return degree() <= 1 && !has_transcendental(); }
  double constant_part() const;
  Expression without_constant() const;
  Expression scaled(double factor) const;
  // Coefficient of the linear term in `name`, 0 when absent.
  double linear_coefficient(std::string_view name) const;

  friend Expression operator+(Expression lhs, const Expression& rhs) {
    return lhs.add(rhs);
  }
  friend Expression operator-(Expression lhs, const Expression& rhs) {
    return lhs.add(rhs, -1.0);
  }
  friend Expression operator*(double factor, const Expression& e) {
    return e.scaled(factor);
  }
  friend bool operator==(const Expression&, const Expression&) = default;

 private:
  std::vector<Term> terms_;
};

enum class Relation { kLessEqual, kEqual, kGreaterEqual };
enum class ConstraintKind { kLinear, kIndicator, kQuadratic, kGeneral };

struct IndicatorGuard {
  std::string variable;
  int value = 1;
  friend bool operator==(const IndicatorGuard&, const IndicatorGuard&) = default;
};

struct Constraint {
  std::string name;
  Expression body;
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
  // `variable = value -> body relation rhs`.
  std::optional<IndicatorGuard> guard;
  // Set by big_m_expand(): the guard this linear row was expanded from.
  std::optional<IndicatorGuard> big_m_origin;

  // lhs relation rhs with arbitrary expressions on both sides.
  static Constraint from_sides(std::string name, const Expression& lhs,
                               Relation relation, const Expression& rhs);

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

enum class ObjectiveSense { kMinimize, kMaximize };

struct ProblemData {
  std::string name;
  ObjectiveSense sense = ObjectiveSense::kMinimize;
  Expression objective;
  std::vector<Variable> variables;
  std::vector<Constraint> constraints;
  std::map<std::string, std::string> metadata;

  const Variable* find_variable(std::string_view name) const;
  std::size_t count_variables(VariableKind kind) const;
};

struct Diagnostic {
  std::string code;      // e.g. "unknown-variable"
  std::string location;  // e.g. "constraint 'c3'"
  std::string message;
};

// Moves every variable term to the body and every constant to the rhs,
// merges like terms. Throws ValidationError naming the offending constraint
// when a term references an undeclared variable.
ProblemData normalize(const ProblemData& pd);

ConstraintKind classify(const Constraint& c);

// One diagnostic per violated invariant; empty when the instance is sound.
std::vector<Diagnostic> validate(const ProblemData& pd);

// Equality up to term order, variable declaration order and metadata.
bool structurally_equal(const ProblemData& a, const ProblemData& b);
// Human-readable reason for inequality, empty when structurally equal.
std::string structural_difference(const ProblemData& a, const ProblemData& b);

// True when the instance has only linear rows (indicator guards allowed).
bool is_mixed_integer_linear(const ProblemData& pd);

// Display-math rendering of the concrete instance.
std::string render_math(const ProblemData& pd);

// Value of `e` at the given point. Throws ValidationError for a variable
// missing from `values`.
double evaluate(const Expression& e, const std::map<std::string, double>& values);

std::string_view to_string(VariableKind kind);
std::string_view to_string(Relation relation);
std::string_view to_string(ConstraintKind kind);
std::string_view to_string(ObjectiveSense sense);
std::string_view to_string(TranscendentalFunction function);

std::optional<VariableKind> parse_variable_kind(std::string_view text);
// Accepts <=, =<, <, >=, =>, >, =, ==; strict inequalities map to <= / >=.
std::optional<Relation> parse_relation(std::string_view text);
std::optional<ObjectiveSense> parse_sense(std::string_view text);
std::optional<TranscendentalFunction> parse_transcendental(std::string_view text);

// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

}  // namespace optsynth
