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
#include <chrono>
#include <cmath>
#include <queue>
#include <unordered_map>

#include <fmt/format.h>

#include "optsynth/errors.hpp"
#include "optsynth/solver.hpp"
#include "simplex.hpp"

namespace optsynth {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool row_satisfied(double activity, Relation rel, double rhs, double tol) {
  switch (rel) {
    case Relation::kLessEqual: return activity <= rhs + tol;
    case Relation::kGreaterEqual: return activity >= rhs - tol;
    case Relation::kEqual: return std::abs(activity - rhs) <= tol;
  }
  return false;
}

double row_violation(double activity, Relation rel, double rhs) {
  switch (rel) {
    case Relation::kLessEqual: return std::max(0.0, activity - rhs);
    case Relation::kGreaterEqual: return std::max(0.0, rhs - activity);
    case Relation::kEqual: return std::abs(activity - rhs);
  }
  return 0.0;
}

struct IndicatorRow {
  detail::LpRow row;
  int guard = -1;
  int value = 1;
};

struct Node {
  std::vector<double> lower;
  std::vector<double> upper;
  double bound = -kInfinity;
  std::size_t depth = 0;
};

struct WorseNode {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.depth < b.depth;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const ProblemData& pd, const SolverLimits& limits) : pd_(pd), limits_(limits) {
    const std::size_t n = pd.variables.size();
    index_.reserve(n);
    for (std::size_t j = 0; j < n; ++j) index_.emplace(pd.variables[j].name, static_cast<int>(j));
    sign_ = pd.sense == ObjectiveSense::kMaximize ? -1.0 : 1.0;
    cost_.assign(n, 0.0);
    objective_integral_ = true;
    for (const auto& t : pd.objective.terms()) {
      if (t.is_constant()) {
        constant_ += t.coefficient();
        objective_integral_ &= t.coefficient() == std::round(t.coefficient());
        continue;
      }
      const int j = index_.at(std::string(t.linear_variable()));
      cost_[j] += sign_ * t.coefficient();
      objective_integral_ &= pd.variables[j].is_integral() && t.coefficient() == std::round(t.coefficient());
    }
    for (const auto& c : pd.constraints) {
      detail::LpRow row = to_row(c);
      if (c.guard) {
        indicators_.push_back({std::move(row), index_.at(c.guard->variable), c.guard->value});
      } else {
        rows_.push_back(std::move(row));
      }
    }
  }

  SolveOutcome run() {
    const auto start = Clock::now();
    deadline_ = start + std::chrono::duration_cast<Clock::duration>(
                            std::chrono::duration<double>(std::max(0.0, limits_.time_limit)));
    SolveOutcome out;

    Node root;
    for (const auto& v : pd_.variables) {
      double lo = v.lower;
      double hi = v.upper;
      if (v.is_integral()) {
        lo = std::ceil(lo - limits_.integrality_tol);
        hi = std::floor(hi + limits_.integrality_tol);
      }
      root.lower.push_back(lo);
      root.upper.push_back(hi);
    }

    std::vector<Node> stack{std::move(root)};
    std::priority_queue<Node, std::vector<Node>, WorseNode> heap;
    bool hit_limit = false;
    bool unbounded = false;

    while (!stack.empty() || !heap.empty()) {
      if (nodes_ >= limits_.node_limit || Clock::now() > deadline_) {
        hit_limit = true;
        break;
      }
      Node node;
      if (!incumbent_ && !stack.empty()) {
        node = std::move(stack.back());
        stack.pop_back();
      } else {
        for (auto& s : stack) heap.push(std::move(s));
        stack.clear();
        node = heap.top();
        heap.pop();
      }
      if (incumbent_ && !improves(node.bound)) continue;
      ++nodes_;

      auto lp = solve_node(node);
      if (lp.status == detail::LpStatus::kLimit) {
        hit_limit = true;
        break;
      }
      if (lp.status == detail::LpStatus::kInfeasible) continue;
      if (lp.status == detail::LpStatus::kUnbounded) {
        unbounded = true;
        break;
      }
      double bound = lp.objective;
      if (objective_integral_) bound = std::ceil(bound - 1e-6);
      if (incumbent_ && !improves(bound)) continue;

      const int j = branching_variable(lp.x);
      if (j >= 0) {
        push_children(node, j, lp.x[j], bound, stack, heap);
        continue;
      }
      const int g = violated_guard(node, lp.x);
      if (g >= 0) {
        push_children(node, g, 0.5, bound, stack, heap);
        continue;
      }
      accept(lp.x);
    }

    out.solve_time = seconds_since(start);
    out.info["nodes"] = std::to_string(nodes_);
    out.info["lp_iterations"] = std::to_string(lp_iterations_);
    if (unbounded) {
      out.status = SolveStatus::kUnbounded;
      return out;
    }
    if (hit_limit) {
      out.status = SolveStatus::kTimeLimit;
      out.info["limit"] = nodes_ >= limits_.node_limit ? "node" : "time";
      if (incumbent_) out.info["incumbent"] = format_number(sign_ * *incumbent_ + constant_);
      double best = kInfinity;
      for (const auto& s : stack) best = std::min(best, s.bound);
      if (!heap.empty()) best = std::min(best, heap.top().bound);
      if (incumbent_) best = std::min(best, *incumbent_);
      if (std::isfinite(best)) out.info["best_bound"] = format_number(sign_ * best + constant_);
      return out;
    }
    if (!incumbent_) {
      out.status = SolveStatus::kInfeasible;
      return out;
    }
    out.status = SolveStatus::kOptimal;
    std::map<std::string, double> solution;
    for (std::size_t j = 0; j < pd_.variables.size(); ++j) solution[pd_.variables[j].name] = best_x_[j];
    out.objective = evaluate(pd_.objective, solution) + 0.0;
    out.solution = std::move(solution);
    return out;
  }

 private:
  detail::LpRow to_row(const Constraint& c) const {
    detail::LpRow row;
    row.relation = c.relation;
    row.rhs = c.rhs;
    for (const auto& t : c.body.terms()) {
      if (t.is_constant()) {
        row.rhs -= t.coefficient();
      } else {
        row.coefs.emplace_back(index_.at(std::string(t.linear_variable())), t.coefficient());
      }
    }
    return row;
  }

  static double activity(const detail::LpRow& row, const std::vector<double>& x) {
    double a = 0.0;
    for (const auto& [j, coef] : row.coefs) a += coef * x[j];
    return a;
  }

  bool improves(double bound) const {
    return bound < *incumbent_ - 1e-9 * std::max(1.0, std::abs(*incumbent_));
  }

  bool guard_fixed(const Node& node, const IndicatorRow& ind) const {
    return node.lower[ind.guard] == node.upper[ind.guard] && node.lower[ind.guard] == ind.value;
  }

  detail::LpResult solve_node(const Node& node) {
    detail::LpProblem lp;
    lp.cost = cost_;
    lp.lower = node.lower;
    lp.upper = node.upper;
    for (const auto& r : rows_) lp.rows.push_back(&r);
    for (const auto& ind : indicators_) {
      if (guard_fixed(node, ind)) lp.rows.push_back(&ind.row);
    }
    detail::LpOptions opts;
    opts.feasibility_tol = limits_.feasibility_tol;
    opts.deadline = deadline_;
    auto result = detail::solve_lp(lp, opts);
    lp_iterations_ += result.iterations;
    return result;
  }

  int branching_variable(const std::vector<double>& x) const {
    int best = -1;
    double best_dist = limits_.integrality_tol;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (!pd_.variables[j].is_integral()) continue;
      const double frac = x[j] - std::floor(x[j]);
      const double dist = std::min(frac, 1.0 - frac);
      if (dist > best_dist) {
        best_dist = dist;
        best = static_cast<int>(j);
      }
    }
    return best;
  }

  int violated_guard(const Node& node, const std::vector<double>& x) const {
    for (const auto& ind : indicators_) {
      if (node.lower[ind.guard] == node.upper[ind.guard]) continue;
      if (std::round(x[ind.guard]) != ind.value) continue;
      if (!row_satisfied(activity(ind.row, x), ind.row.relation, ind.row.rhs, limits_.feasibility_tol)) {
        return ind.guard;
      }
    }
    return -1;
  }

  void push_children(const Node& node, int j, double value, double bound, std::vector<Node>& stack,
                     std::priority_queue<Node, std::vector<Node>, WorseNode>& heap) {
    Node down = node;
    down.upper[j] = std::floor(value);
    Node up = node;
    up.lower[j] = std::ceil(value);
    down.bound = up.bound = bound;
    down.depth = up.depth = node.depth + 1;
    // The child nearer the LP value is explored first while diving.
    const bool up_first = value - std::floor(value) >= 0.5;
    Node& first = up_first ? up : down;
    Node& second = up_first ? down : up;
    if (incumbent_) {
      heap.push(std::move(first));
      heap.push(std::move(second));
    } else {
      stack.push_back(std::move(second));
      stack.push_back(std::move(first));
    }
  }

  bool feasible(const std::vector<double>& x) const {
    for (const auto& r : rows_) {
      if (!row_satisfied(activity(r, x), r.relation, r.rhs, limits_.feasibility_tol)) return false;
    }
    for (const auto& ind : indicators_) {
      if (std::round(x[ind.guard]) != ind.value) continue;
      if (!row_satisfied(activity(ind.row, x), ind.row.relation, ind.row.rhs, limits_.feasibility_tol)) {
        return false;
      }
    }
    return true;
  }

  void accept(const std::vector<double>& lp_x) {
    std::vector<double> x = lp_x;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (pd_.variables[j].is_integral()) x[j] = std::round(x[j]);
      if (x[j] == 0.0) x[j] = 0.0;
    }
    if (!feasible(x)) x = lp_x;
    double value = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) value += cost_[j] * x[j];
    if (!incumbent_ || value < *incumbent_) {
      incumbent_ = value;
      best_x_ = std::move(x);
    }
  }

  const ProblemData& pd_;
  const SolverLimits& limits_;
  std::unordered_map<std::string, int> index_;
  double sign_ = 1.0;
  double constant_ = 0.0;
  bool objective_integral_ = false;
  std::vector<double> cost_;
  std::vector<detail::LpRow> rows_;
  std::vector<IndicatorRow> indicators_;
  Clock::time_point deadline_;
  std::optional<double> incumbent_;
  std::vector<double> best_x_;
  std::size_t nodes_ = 0;
  std::size_t lp_iterations_ = 0;
};

}  // namespace

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kTimeLimit: return "time-limit";
    case SolveStatus::kError: return "error";
  }
  return "error";
}

std::optional<SolveStatus> parse_solve_status(std::string_view text) {
  for (auto s : {SolveStatus::kOptimal, SolveStatus::kInfeasible, SolveStatus::kUnbounded,
                 SolveStatus::kTimeLimit, SolveStatus::kError}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

nlohmann::json SolveOutcome::to_json() const {
  nlohmann::json j;
  j["status"] = std::string(to_string(status));
  j["objective"] = objective ? nlohmann::json(*objective) : nlohmann::json(nullptr);
  j["solve_time"] = solve_time;
  if (solution) j["solution"] = *solution;
  if (!info.empty()) j["info"] = info;
  return j;
}

void SolverLimits::check() const {
  auto tol_ok = [](double t) { return t > 0.0 && t <= 1e-3; };
  if (!tol_ok(feasibility_tol)) throw ConfigError("feasibility_tol must lie in (0, 1e-3]");
  if (!tol_ok(integrality_tol)) throw ConfigError("integrality_tol must lie in (0, 1e-3]");
  if (!(time_limit > 0.0)) throw ConfigError("time_limit must be positive");
  if (node_limit == 0) throw ConfigError("node_limit must be positive");
}

bool values_match(double a, double b, double eps) {
  return std::abs(a - b) / (std::abs(b) + 1.0) < eps;
}

std::optional<std::string> builtin_rejection(const ProblemData& pd, const DeskCap& cap) {
  if (pd.variables.size() > cap.max_variables) {
    return fmt::format("{} variables exceed the built-in cap of {}", pd.variables.size(), cap.max_variables);
  }
  if (pd.constraints.size() > cap.max_constraints) {
    return fmt::format("{} constraints exceed the built-in cap of {}", pd.constraints.size(),
                       cap.max_constraints);
  }
  if (!pd.objective.is_linear()) return std::string("nonlinear objective");
  for (const auto& c : pd.constraints) {
    const auto kind = classify(c);
    if (kind == ConstraintKind::kQuadratic || kind == ConstraintKind::kGeneral ||
        !c.body.is_linear()) {
      return fmt::format("constraint '{}' is {}", c.name, to_string(kind));
    }
  }
  return std::nullopt;
}

SolveOutcome solve_builtin(const ProblemData& pd, const SolverLimits& limits, const DeskCap& cap) {
  limits.check();
  if (auto why = builtin_rejection(pd, cap)) {
    throw CapabilityError("built-in solver cannot handle this model (" + *why +
                          "); configure an external solver");
  }
  return BranchAndBound(pd, limits).run();
}

double max_violation(const ProblemData& pd, const std::map<std::string, double>& solution) {
  double worst = 0.0;
  for (const auto& v : pd.variables) {
    auto it = solution.find(v.name);
    if (it == solution.end()) return kInfinity;
    const double x = it->second;
    worst = std::max({worst, v.lower - x, x - v.upper});
    if (v.is_integral()) worst = std::max(worst, std::abs(x - std::round(x)));
  }
  for (const auto& c : pd.constraints) {
    if (c.guard) {
      auto it = solution.find(c.guard->variable);
      if (it == solution.end() || std::round(it->second) != c.guard->value) continue;
    }
    worst = std::max(worst, row_violation(evaluate(c.body, solution), c.relation, c.rhs));
  }
  return worst;
}

SolveOutcome solve(const ProblemData& pd, const SolverConfig& config) {
  SolveOutcome error;
  const bool builtin_ok = !builtin_rejection(pd, config.cap).has_value();
  try {
    switch (config.mode) {
      case SolverMode::kBuiltin:
        return solve_builtin(pd, config.limits, config.cap);
      case SolverMode::kExternal:
        if (!config.external) throw CapabilityError("no external solver configured");
        return solve_external(pd, *config.external, config.limits);
      case SolverMode::kAuto:
        if (builtin_ok) return solve_builtin(pd, config.limits, config.cap);
        if (config.external) return solve_external(pd, *config.external, config.limits);
        throw CapabilityError("built-in solver cannot handle this model (" +
                              *builtin_rejection(pd, config.cap) + ") and no external solver is configured");
    }
  } catch (const Error& e) {
    error.info["error"] = e.what();
  }
  return error;
}

}  // namespace optsynth
