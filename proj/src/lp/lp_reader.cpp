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
#include <map>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "optsynth/errors.hpp"
#include "optsynth/kv_config.hpp"
#include "optsynth/lp_io.hpp"

namespace optsynth {

namespace {

enum class TokenKind {
  kName,
  kNumber,
  kPlus,
  kMinus,
  kStar,
  kCaret,
  kSlash,
  kRelation,
  kColon,
  kLBracket,
  kRBracket,
  kArrow,
  kAnnotation,  // "\ big-M origin: y = 1" comment attached to the next row
};

struct Token {
  TokenKind kind;
  std::string text;
  double value = 0.0;
  std::size_t line = 0;
  std::size_t column = 0;
};

enum class Section { kNone, kObjective, kConstraints, kBounds, kBinaries, kGenerals, kEnd };

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string collapse_spaces(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

std::optional<Section> section_keyword(const std::string& line, ObjectiveSense* sense) {
  static const std::map<std::string, Section> keywords = {
      {"minimize", Section::kObjective},   {"minimise", Section::kObjective},
      {"minimum", Section::kObjective},    {"min", Section::kObjective},
      {"maximize", Section::kObjective},   {"maximise", Section::kObjective},
      {"maximum", Section::kObjective},    {"max", Section::kObjective},
      {"subject to", Section::kConstraints}, {"such that", Section::kConstraints},
      {"st", Section::kConstraints},       {"s.t.", Section::kConstraints},
      {"bounds", Section::kBounds},        {"bound", Section::kBounds},
      {"binaries", Section::kBinaries},    {"binary", Section::kBinaries},
      {"bin", Section::kBinaries},         {"generals", Section::kGenerals},
      {"general", Section::kGenerals},     {"gen", Section::kGenerals},
      {"integers", Section::kGenerals},    {"end", Section::kEnd}};
  const std::string key = lowercase(collapse_spaces(line));
  auto it = keywords.find(key);
  if (it == keywords.end()) return std::nullopt;
  if (it->second == Section::kObjective) {
    *sense = key.rfind("min", 0) == 0 ? ObjectiveSense::kMinimize : ObjectiveSense::kMaximize;
  }
  return it->second;
}

bool is_unknown_section(const std::string& line) {
  static const std::unordered_set<std::string> known_unsupported = {
      "semi-continuous", "semi-continuous variables", "semis", "semi", "sos",
      "sos1", "sos2", "general constraints", "general constraint", "gencons",
      "lazy constraints", "user cuts", "pwlobj", "pwl", "objective sense",
      "objective", "declarations"};
  return known_unsupported.count(lowercase(collapse_spaces(line))) > 0;
}

bool name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

void tokenize_line(std::string_view line, std::size_t line_no, std::vector<Token>& out) {
  std::size_t i = 0;
  auto at = [&](std::size_t k) { return k < line.size() ? line[k] : '\0'; };
  while (i < line.size()) {
    const char c = line[i];
    const std::size_t col = i + 1;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && std::isdigit(static_cast<unsigned char>(at(i + 1))))) {
      std::size_t j = i;
      while (std::isdigit(static_cast<unsigned char>(at(j)))) ++j;
      if (at(j) == '.') {
        ++j;
        while (std::isdigit(static_cast<unsigned char>(at(j)))) ++j;
      }
      if (at(j) == 'e' || at(j) == 'E') {
        std::size_t k = j + 1;
        if (at(k) == '+' || at(k) == '-') ++k;
        if (std::isdigit(static_cast<unsigned char>(at(k)))) {
          while (std::isdigit(static_cast<unsigned char>(at(k)))) ++k;
          j = k;
        }
      }
      const std::string text(line.substr(i, j - i));
      out.push_back({TokenKind::kNumber, text, std::stod(text), line_no, col});
      i = j;
      continue;
    }
    if (name_start(c)) {
      std::size_t j = i;
      while (name_char(at(j))) ++j;
      out.push_back({TokenKind::kName, std::string(line.substr(i, j - i)), 0.0, line_no, col});
      i = j;
      continue;
    }
    auto push = [&](TokenKind kind, std::size_t len) {
      out.push_back({kind, std::string(line.substr(i, len)), 0.0, line_no, col});
      i += len;
    };
    switch (c) {
      case '+': push(TokenKind::kPlus, 1); break;
      case '-':
        if (at(i + 1) == '>') push(TokenKind::kArrow, 2);
        else push(TokenKind::kMinus, 1);
        break;
      case '*': push(TokenKind::kStar, 1); break;
      case '^': push(TokenKind::kCaret, 1); break;
      case '/': push(TokenKind::kSlash, 1); break;
      case ':': push(TokenKind::kColon, 1); break;
      case '[': push(TokenKind::kLBracket, 1); break;
      case ']': push(TokenKind::kRBracket, 1); break;
      case '<':
      case '>':
        push(TokenKind::kRelation, at(i + 1) == '=' ? 2 : 1);
        break;
      case '=':
        push(TokenKind::kRelation, (at(i + 1) == '<' || at(i + 1) == '>' || at(i + 1) == '=') ? 2 : 1);
        break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line_no, col);
    }
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ProblemData run() {
    split_sections();
    parse_objective();
    parse_constraints();
    parse_bounds();
    parse_kinds(binaries_, VariableKind::kBinary);
    parse_kinds(generals_, VariableKind::kInteger);
    return build();
  }

 private:
  struct Row {
    Constraint constraint;
    std::size_t line;
    std::size_t column;
  };

  void split_sections() {
    Section current = Section::kNone;
    bool seen_objective = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    std::size_t last_len = 0;
    while (pos < text_.size()) {
      auto end = text_.find('\n', pos);
      if (end == std::string_view::npos) end = text_.size();
      std::string_view line = text_.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      last_len = line.size();
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

      std::string_view content = line;
      if (auto bs = line.find('\\'); bs != std::string_view::npos) {
        content = line.substr(0, bs);
        handle_comment(trim(line.substr(bs + 1)), line_no, bs + 1, current);
      }
      const std::string trimmed = trim(content);
      if (trimmed.empty()) continue;
      if (current == Section::kEnd) {
        throw ParseError("unexpected text after End", line_no, 1);
      }
      ObjectiveSense sense{};
      if (auto s = section_keyword(trimmed, &sense)) {
        if (*s == Section::kObjective) {
          if (seen_objective) throw ParseError("second objective section", line_no, 1);
          seen_objective = true;
          sense_ = sense;
        } else if (!seen_objective) {
          throw ParseError("expected Minimize or Maximize before '" + trimmed + "'", line_no, 1);
        }
        current = *s;
        continue;
      }
      if (is_unknown_section(trimmed)) {
        throw ParseError("unknown section '" + trimmed + "'", line_no, 1);
      }
      switch (current) {
        case Section::kNone:
          throw ParseError("expected Minimize or Maximize", line_no, 1);
        case Section::kObjective: tokenize_line(content, line_no, objective_); break;
        case Section::kConstraints: tokenize_line(content, line_no, rows_); break;
        case Section::kBounds: {
          std::vector<Token> tokens;
          tokenize_line(content, line_no, tokens);
          bounds_.push_back(std::move(tokens));
          break;
        }
        case Section::kBinaries: tokenize_line(content, line_no, binaries_); break;
        case Section::kGenerals: tokenize_line(content, line_no, generals_); break;
        case Section::kEnd: break;
      }
    }
    if (current != Section::kEnd) {
      throw ParseError("unexpected end of input: missing End",
                       std::max<std::size_t>(line_no, 1), last_len + 1);
    }
  }

  void handle_comment(const std::string& comment, std::size_t line_no, std::size_t column,
                      Section current) {
    static constexpr std::string_view kName = "Problem name:";
    static constexpr std::string_view kOrigin = "big-M origin:";
    if (comment.rfind(kName, 0) == 0 && current == Section::kNone && name_.empty()) {
      name_ = trim(std::string_view(comment).substr(kName.size()));
    } else if (comment.rfind(kOrigin, 0) == 0 && current == Section::kConstraints) {
      rows_.push_back({TokenKind::kAnnotation, trim(std::string_view(comment).substr(kOrigin.size())),
                       0.0, line_no, column});
    }
  }

  // ---- token cursor -------------------------------------------------------

  [[noreturn]] void fail_at(const std::vector<Token>& toks, std::size_t i, const std::string& what) {
    if (i < toks.size()) throw ParseError(what + " near '" + toks[i].text + "'", toks[i].line, toks[i].column);
    if (!toks.empty()) {
      const auto& t = toks.back();
      throw ParseError(what + " at end of section", t.line, t.column + t.text.size());
    }
    throw ParseError(what, 0, 0);
  }

  static bool is(const std::vector<Token>& toks, std::size_t i, TokenKind kind) {
    return i < toks.size() && toks[i].kind == kind;
  }

  std::string variable(const Token& t) {
    if (!known_.count(t.text)) {
      known_.insert(t.text);
      order_.push_back(t.text);
    }
    return t.text;
  }

  // Parses "[ q1 + q2 ... ]" starting at toks[i] == '['.
  void parse_quadratic(const std::vector<Token>& toks, std::size_t& i, Expression& e, bool objective) {
    const std::size_t open = i++;
    Expression quad;
    bool first = true;
    while (!is(toks, i, TokenKind::kRBracket)) {
      if (i >= toks.size()) fail_at(toks, open, "unterminated '['");
      double sign = 1.0;
      bool saw_sign = false;
      while (is(toks, i, TokenKind::kPlus) || is(toks, i, TokenKind::kMinus)) {
        if (toks[i].kind == TokenKind::kMinus) sign = -sign;
        saw_sign = true;
        ++i;
      }
      if (!first && !saw_sign) fail_at(toks, i, "expected '+' or '-' between quadratic terms");
      double coefficient = 1.0;
      if (is(toks, i, TokenKind::kNumber)) coefficient = toks[i++].value;
      if (!is(toks, i, TokenKind::kName)) fail_at(toks, i, "expected a variable in quadratic term");
      std::vector<Factor> factors{{variable(toks[i++]), 1}};
      if (is(toks, i, TokenKind::kCaret)) {
        ++i;
        if (!is(toks, i, TokenKind::kNumber) || toks[i].value != 2.0) fail_at(toks, i, "only '^ 2' is supported");
        ++i;
        factors[0].exponent = 2;
      } else if (is(toks, i, TokenKind::kStar)) {
        ++i;
        if (!is(toks, i, TokenKind::kName)) fail_at(toks, i, "expected a variable after '*'");
        factors.push_back({variable(toks[i++]), 1});
      } else {
        fail_at(toks, i, "expected '^ 2' or '* var' in quadratic term");
      }
      quad.add(Term(sign * coefficient, std::move(factors)));
      first = false;
    }
    ++i;  // ']'
    double scale = 1.0;
    if (objective && is(toks, i, TokenKind::kSlash)) {
      ++i;
      if (!is(toks, i, TokenKind::kNumber) || toks[i].value != 2.0) fail_at(toks, i, "expected '/ 2'");
      ++i;
      scale = 0.5;
    }
    e.add(quad, scale);
  }

  // Parses terms until a relation token or the end of the token list.
  Expression parse_expression(const std::vector<Token>& toks, std::size_t& i, bool objective) {
    Expression e;
    bool first = true;
    while (i < toks.size() && toks[i].kind != TokenKind::kRelation &&
           toks[i].kind != TokenKind::kAnnotation) {
      double sign = 1.0;
      bool saw_sign = false;
      while (is(toks, i, TokenKind::kPlus) || is(toks, i, TokenKind::kMinus)) {
        if (toks[i].kind == TokenKind::kMinus) sign = -sign;
        saw_sign = true;
        ++i;
      }
      if (!first && !saw_sign) fail_at(toks, i, "expected '+', '-' or a relation");
      if (is(toks, i, TokenKind::kLBracket)) {
        if (sign < 0) fail_at(toks, i, "negated quadratic block");
        parse_quadratic(toks, i, e, objective);
      } else if (is(toks, i, TokenKind::kNumber)) {
        const double value = toks[i++].value;
        if (is(toks, i, TokenKind::kName) && !is(toks, i + 1, TokenKind::kColon)) {
          e.add(Term::linear(sign * value, variable(toks[i++])));
        } else {
          e.add(Term::constant(sign * value));
        }
      } else if (is(toks, i, TokenKind::kName)) {
        if (is(toks, i + 1, TokenKind::kColon)) fail_at(toks, i, "missing relation before label");
        e.add(Term::linear(sign, variable(toks[i++])));
      } else {
        fail_at(toks, i, "expected a term");
      }
      first = false;
    }
    return e;
  }

  void parse_objective() {
    std::size_t i = 0;
    if (is(objective_, 0, TokenKind::kName) && is(objective_, 1, TokenKind::kColon)) i = 2;
    objective_expr_ = parse_expression(objective_, i, true);
    if (i < objective_.size()) fail_at(objective_, i, "unexpected token in objective");
  }

  std::optional<double> parse_signed_number(const std::vector<Token>& toks, std::size_t& i) {
    double sign = 1.0;
    while (is(toks, i, TokenKind::kPlus) || is(toks, i, TokenKind::kMinus)) {
      if (toks[i].kind == TokenKind::kMinus) sign = -sign;
      ++i;
    }
    if (is(toks, i, TokenKind::kNumber)) return sign * toks[i++].value;
    if (is(toks, i, TokenKind::kName)) {
      const auto word = lowercase(toks[i].text);
      if (word == "inf" || word == "infinity") {
        ++i;
        return sign * kInfinity;
      }
    }
    return std::nullopt;
  }

  void parse_constraints() {
    const auto& toks = rows_;
    std::size_t i = 0;
    std::optional<IndicatorGuard> pending_origin;
    std::unordered_map<std::string, std::size_t> names;
    while (i < toks.size()) {
      if (toks[i].kind == TokenKind::kAnnotation) {
        pending_origin = parse_origin(toks[i]);
        ++i;
        continue;
      }
      Row row;
      row.line = toks[i].line;
      row.column = toks[i].column;
      auto& c = row.constraint;
      if (is(toks, i, TokenKind::kName) && is(toks, i + 1, TokenKind::kColon)) {
        c.name = toks[i].text;
        i += 2;
      } else {
        c.name = "R" + std::to_string(rows_out_.size() + 1);
      }
      if (!names.emplace(c.name, rows_out_.size()).second) {
        throw ParseError("duplicate constraint name '" + c.name + "'", row.line, row.column);
      }
      if (is(toks, i, TokenKind::kName) && is(toks, i + 1, TokenKind::kRelation) &&
          toks[i + 1].text == "=" && is(toks, i + 2, TokenKind::kNumber) &&
          is(toks, i + 3, TokenKind::kArrow)) {
        const double v = toks[i + 2].value;
        if (v != 0.0 && v != 1.0) fail_at(toks, i + 2, "indicator value must be 0 or 1");
        c.guard = IndicatorGuard{variable(toks[i]), static_cast<int>(v)};
        i += 4;
      }
      c.body = parse_expression(toks, i, false);
      if (!is(toks, i, TokenKind::kRelation)) fail_at(toks, i, "expected a relation");
      c.relation = *parse_relation(toks[i].text);
      ++i;
      auto rhs = parse_signed_number(toks, i);
      if (!rhs || !std::isfinite(*rhs)) fail_at(toks, i, "expected a finite right-hand side");
      c.rhs = *rhs;
      c.big_m_origin = pending_origin;
      pending_origin.reset();
      rows_out_.push_back(std::move(row));
    }
  }

  IndicatorGuard parse_origin(const Token& t) {
    std::vector<Token> toks;
    tokenize_line(t.text, t.line, toks);
    if (toks.size() != 3 || toks[0].kind != TokenKind::kName || toks[1].text != "=" ||
        toks[2].kind != TokenKind::kNumber || (toks[2].value != 0.0 && toks[2].value != 1.0)) {
      throw ParseError("malformed big-M origin annotation", t.line, t.column);
    }
    return {toks[0].text, static_cast<int>(toks[2].value)};
  }

  void parse_bounds() {
    for (const auto& toks : bounds_) {
      std::size_t i = 0;
      if (is(toks, 0, TokenKind::kName) && toks.size() == 2 && is(toks, 1, TokenKind::kName) &&
          lowercase(toks[1].text) == "free") {
        const auto name = variable(toks[0]);
        set_bound(name, -kInfinity, true);
        set_bound(name, kInfinity, false);
        continue;
      }
      if (is(toks, 0, TokenKind::kName) && lowercase(toks[0].text) != "inf" &&
          lowercase(toks[0].text) != "infinity") {
        const auto name = variable(toks[0]);
        i = 1;
        if (!is(toks, i, TokenKind::kRelation)) fail_at(toks, i, "expected a relation in bound");
        const auto rel = *parse_relation(toks[i++].text);
        auto value = parse_signed_number(toks, i);
        if (!value) fail_at(toks, i, "expected a number in bound");
        apply(name, rel, *value, false);
      } else {
        auto value = parse_signed_number(toks, i);
        if (!value) fail_at(toks, i, "expected a bound");
        if (!is(toks, i, TokenKind::kRelation)) fail_at(toks, i, "expected a relation in bound");
        const auto rel = *parse_relation(toks[i++].text);
        if (!is(toks, i, TokenKind::kName)) fail_at(toks, i, "expected a variable in bound");
        const auto name = variable(toks[i++]);
        apply(name, rel, *value, true);
        if (i < toks.size()) {
          if (!is(toks, i, TokenKind::kRelation)) fail_at(toks, i, "expected a relation in bound");
          const auto rel2 = *parse_relation(toks[i++].text);
          auto value2 = parse_signed_number(toks, i);
          if (!value2) fail_at(toks, i, "expected a number in bound");
          apply(name, rel2, *value2, false);
        }
      }
      if (i != toks.size()) fail_at(toks, i, "unexpected token in bound");
    }
  }

  // `reversed` means the number is on the left: value rel name.
  void apply(const std::string& name, Relation rel, double value, bool reversed) {
    if (rel == Relation::kEqual) {
      set_bound(name, value, true);
      set_bound(name, value, false);
      return;
    }
    const bool is_upper = (rel == Relation::kLessEqual) != reversed;
    set_bound(name, value, !is_upper);
  }

  void set_bound(const std::string& name, double value, bool lower) {
    auto& b = bounds_by_name_[name];
    (lower ? b.lower : b.upper) = value;
  }

  void parse_kinds(const std::vector<Token>& toks, VariableKind kind) {
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (toks[i].kind != TokenKind::kName) fail_at(toks, i, "expected a variable name");
      const auto name = variable(toks[i]);
      auto [it, inserted] = kinds_.emplace(name, kind);
      if (!inserted && it->second != kind) {
        throw ParseError("variable '" + name + "' declared both binary and general",
                         toks[i].line, toks[i].column);
      }
    }
  }

  ProblemData build() {
    ProblemData pd;
    pd.name = name_;
    pd.sense = sense_;
    pd.objective = objective_expr_;
    for (const auto& name : order_) {
      Variable v;
      v.name = name;
      auto k = kinds_.find(name);
      v.kind = k == kinds_.end() ? VariableKind::kContinuous : k->second;
      v.lower = 0.0;
      v.upper = v.kind == VariableKind::kBinary ? 1.0 : kInfinity;
      if (auto b = bounds_by_name_.find(name); b != bounds_by_name_.end()) {
        if (b->second.lower) v.lower = *b->second.lower;
        if (b->second.upper) v.upper = *b->second.upper;
      }
      pd.variables.push_back(std::move(v));
    }
    for (auto& row : rows_out_) pd.constraints.push_back(std::move(row.constraint));
    pd = normalize(pd);
    const auto diagnostics = validate(pd);
    if (!diagnostics.empty()) {
      const auto& d = diagnostics.front();
      std::size_t line = 0, column = 0;
      for (const auto& row : rows_out_) {
        if (d.location == "constraint '" + row.constraint.name + "'") {
          line = row.line;
          column = row.column;
        }
      }
      throw ParseError(d.location + ": " + d.message, line, column);
    }
    return pd;
  }

  struct Bounds {
    std::optional<double> lower;
    std::optional<double> upper;
  };

  std::string_view text_;
  std::string name_;
  ObjectiveSense sense_ = ObjectiveSense::kMinimize;
  std::vector<Token> objective_;
  std::vector<Token> rows_;
  std::vector<std::vector<Token>> bounds_;
  std::vector<Token> binaries_;
  std::vector<Token> generals_;

  Expression objective_expr_;
  std::vector<Row> rows_out_;
  std::unordered_set<std::string> known_;
  std::vector<std::string> order_;
  std::unordered_map<std::string, Bounds> bounds_by_name_;
  std::unordered_map<std::string, VariableKind> kinds_;
};

}  // namespace

ProblemData parse_lp(std::string_view text) { return Parser(text).run(); }

}  // namespace optsynth
