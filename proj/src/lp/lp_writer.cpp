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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "optsynth/errors.hpp"
#include "optsynth/lp_io.hpp"

namespace optsynth {

namespace {

constexpr std::string_view kIndent = "  ";
constexpr std::string_view kContinuation = "    ";

bool is_reserved(std::string_view name) {
  static const std::set<std::string> reserved = {
      "min",      "max",      "minimize", "maximize", "minimise", "maximise",
      "minimum",  "maximum",  "st",       "subject",  "such",     "bounds",
      "bound",    "binaries", "binary",   "bin",      "generals", "general",
      "gen",      "integers", "end",      "free",     "inf",      "infinity"};
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return reserved.count(lower) > 0;
}

// Accumulates space-separated units into lines no wider than the limit.
class LineWrapper {
 public:
  explicit LineWrapper(std::size_t width) : width_(width) {}

  void start() {
    flush();
    line_ = std::string(kIndent);
    fresh_ = true;
  }
  void unit(const std::string& u) {
    if (!fresh_ && line_.size() + 1 + u.size() > width_) {
      out_ += line_ + "\n";
      line_ = std::string(kContinuation);
      fresh_ = true;
    }
    if (!fresh_) line_ += ' ';
    line_ += u;
    fresh_ = false;
  }
  void raw_line(const std::string& text) {
    flush();
    out_ += text + "\n";
  }
  std::string finish() {
    flush();
    return std::move(out_);
  }

 private:
  void flush() {
    if (!line_.empty()) out_ += line_ + "\n";
    line_.clear();
  }

  std::size_t width_;
  std::string out_;
  std::string line_;
  bool fresh_ = true;
};

std::string monomial_text(const Term& t, const std::unordered_map<std::string, std::string>& names) {
  std::string out;
  for (const auto& f : t.factors()) {
    const std::string& n = names.at(f.variable);
    for (int e = 0; e < f.exponent;) {
      if (!out.empty()) out += " * ";
      out += n;
      if (f.exponent - e >= 2) {
        out += " ^ 2";
        e += 2;
      } else {
        ++e;
      }
    }
  }
  return out;
}

std::string signed_unit(double coefficient, const std::string& monomial, bool first) {
  std::string out;
  if (coefficient < 0) {
    out = "- ";
  } else if (!first) {
    out = "+ ";
  }
  const double magnitude = std::abs(coefficient);
  if (monomial.empty()) return out + format_number(magnitude);
  if (magnitude != 1.0) out += format_number(magnitude) + " ";
  return out + monomial;
}

class Writer {
 public:
  Writer(const ProblemData& pd, const LpDialectOptions& options)
      : pd_(pd), options_(options), lines_(options.max_line_width) {}

  std::string run() {
    assign_names();
    if (!pd_.name.empty()) {
      std::string name = pd_.name;
      std::replace(name.begin(), name.end(), '\n', ' ');
      lines_.raw_line("\\ Problem name: " + name);
    }
    lines_.raw_line(pd_.sense == ObjectiveSense::kMinimize ? "Minimize" : "Maximize");
    lines_.start();
    lines_.unit("obj:");
    write_expression(pd_.objective, true, "objective");
    lines_.raw_line("Subject To");
    for (const auto& c : pd_.constraints) write_constraint(c);
    write_bounds();
    write_kind_section("Binaries", VariableKind::kBinary);
    write_kind_section("Generals", VariableKind::kInteger);
    lines_.raw_line("End");
    return lines_.finish();
  }

 private:
  void assign_names() {
    std::unordered_set<std::string> used;
    auto claim = [&](const std::string& original, const char* what) {
      std::string n = sanitize_name(original, options_.name_sanitization);
      if (!used.insert(n).second) {
        throw UnsupportedConstructError(std::string(what) + " name '" + original +
                                        "' collides with another name as '" + n + "'");
      }
      return n;
    };
    for (const auto& v : pd_.variables) names_[v.name] = claim(v.name, "variable");
    used.clear();
    for (const auto& c : pd_.constraints) row_names_.push_back(claim(c.name, "constraint"));

    // Appearance order: objective, rows, then everything else as declared.
    std::unordered_set<std::string> seen;
    auto visit = [&](const Expression& e) {
      for (const auto& t : e.terms()) {
        for (const auto& f : t.factors()) {
          if (seen.insert(f.variable).second) order_.push_back(f.variable);
        }
      }
    };
    visit(pd_.objective);
    for (const auto& c : pd_.constraints) {
      if (c.guard && seen.insert(c.guard->variable).second) order_.push_back(c.guard->variable);
      visit(c.body);
    }
    used_count_ = order_.size();
    for (const auto& v : pd_.variables) {
      if (seen.insert(v.name).second) order_.push_back(v.name);
    }
  }

  void check_expression(const Expression& e, const std::string& where) {
    if (e.has_transcendental() || e.degree() > 2) {
      throw UnsupportedConstructError(where + " is general nonlinear; the LP format cannot express it");
    }
    if (e.degree() == 2 && !options_.emit_quadratics) {
      throw UnsupportedConstructError(where + " has quadratic terms and quadratic emission is disabled");
    }
  }

  void write_expression(const Expression& e, bool objective, const std::string& where) {
    check_expression(e, where);
    bool first = true;
    for (const auto& t : e.terms()) {
      if (t.degree() > 1) continue;
      const std::string mono = t.is_constant() ? std::string() : names_.at(t.factors()[0].variable);
      lines_.unit(signed_unit(t.coefficient(), mono, first));
      first = false;
    }
    bool bracket_open = false;
    for (const auto& t : e.terms()) {
      if (t.degree() != 2) continue;
      if (!bracket_open) {
        lines_.unit(first ? "[" : "+ [");
        bracket_open = true;
        first = true;
      }
      const double coefficient = objective ? 2.0 * t.coefficient() : t.coefficient();
      lines_.unit(signed_unit(coefficient, monomial_text(t, names_), first));
      first = false;
    }
    if (bracket_open) lines_.unit(objective ? "] / 2" : "]");
    if (first && !bracket_open) lines_.unit("0");
  }

  void write_constraint(const Constraint& c) {
    const std::string& row = row_names_[&c - pd_.constraints.data()];
    const std::string where = "constraint '" + c.name + "'";
    if (c.guard && !options_.emit_indicators) {
      throw UnsupportedConstructError(where + " is an indicator constraint and indicator emission is disabled");
    }
    if (c.big_m_origin) {
      lines_.raw_line("\\ big-M origin: " + names_.at(c.big_m_origin->variable) + " = " +
                      std::to_string(c.big_m_origin->value));
    }
    lines_.start();
    lines_.unit(row + ":");
    if (c.guard) {
      lines_.unit(names_.at(c.guard->variable) + " = " + std::to_string(c.guard->value) + " ->");
    }
    write_expression(c.body.without_constant(), false, where);
    const double rhs = c.rhs - c.body.constant_part();
    lines_.unit(std::string(to_string(c.relation)) + " " + format_number(rhs));
  }

  static std::string bound_text(double v) {
    if (v == kInfinity) return "+inf";
    if (v == -kInfinity) return "-inf";
    return format_number(v);
  }

  void write_bounds() {
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < order_.size(); ++i) {
      const Variable& v = *pd_.find_variable(order_[i]);
      const bool unused = i >= used_count_;
      const double default_upper = v.kind == VariableKind::kBinary ? 1.0 : kInfinity;
      if (!unused && v.lower == 0.0 && v.upper == default_upper) continue;
      const std::string& n = names_.at(v.name);
      std::string line;
      if (v.lower == v.upper) {
        line = n + " = " + bound_text(v.lower);
      } else if (v.lower == -kInfinity && v.upper == kInfinity) {
        line = n + " free";
      } else if (v.upper == kInfinity) {
        line = n + " >= " + bound_text(v.lower);
      } else {
        line = bound_text(v.lower) + " <= " + n + " <= " + bound_text(v.upper);
      }
      lines.push_back(std::string(kIndent) + line);
    }
    if (lines.empty()) return;
    lines_.raw_line("Bounds");
    for (const auto& l : lines) lines_.raw_line(l);
  }

  void write_kind_section(const char* header, VariableKind kind) {
    bool any = false;
    for (const auto& name : order_) {
      if (pd_.find_variable(name)->kind != kind) continue;
      if (!any) {
        lines_.raw_line(header);
        lines_.start();
        any = true;
      }
      lines_.unit(names_.at(name));
    }
  }

  const ProblemData& pd_;
  LpDialectOptions options_;
  LineWrapper lines_;
  std::unordered_map<std::string, std::string> names_;
  std::vector<std::string> row_names_;
  std::vector<std::string> order_;
  std::size_t used_count_ = 0;
};

}  // namespace

void LpDialectOptions::check() const {
  if (max_line_width < 64) throw ConfigError("max_line_width must be at least 64");
}

std::string sanitize_name(std::string_view name, NameSanitization mode) {
  std::string out;
  out.reserve(name.size() + 1);
  for (char ch : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '_';
    out += ok ? ch : '_';
  }
  if (out.empty()) out = "_";
  if (std::isdigit(static_cast<unsigned char>(out[0]))) out.insert(out.begin(), '_');
  if (is_reserved(out)) out += '_';
  if (mode == NameSanitization::kStrict && out != name) {
    throw UnsupportedConstructError("name '" + std::string(name) +
                                    "' is not a valid LP identifier");
  }
  return out;
}

std::string emit_lp(const ProblemData& pd, const LpDialectOptions& options) {
  options.check();
  return Writer(pd, options).run();
}

std::size_t lp_length(std::string_view text) {
  return static_cast<std::size_t>(std::count_if(text.begin(), text.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

}  // namespace optsynth
