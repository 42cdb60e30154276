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
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "optsynth/errors.hpp"
#include "optsynth/generators.hpp"
#include "optsynth/solver.hpp"

namespace optsynth {

namespace {

ParamDecl int_range(std::string name, std::int64_t low, std::int64_t high, double min, double max,
                    std::string description) {
  return {std::move(name), ParamType::kIntRange, min, max, IntRange{low, high}, std::move(description)};
}

ParamDecl real_range(std::string name, double low, double high, double min, double max, std::string description) {
  return {std::move(name), ParamType::kRealRange, min, max, RealRange{low, high}, std::move(description)};
}

ParamDecl integer(std::string name, std::int64_t value, double min, double max, std::string description) {
  return {std::move(name), ParamType::kInteger, min, max, value, std::move(description)};
}

ParamDecl real(std::string name, double value, double min, double max, std::string description) {
  return {std::move(name), ParamType::kReal, min, max, value, std::move(description)};
}

std::string idx(std::string_view stem, std::size_t i) { return fmt::format("{}_{}", stem, i); }
std::string idx(std::string_view stem, std::size_t i, std::size_t j) { return fmt::format("{}_{}_{}", stem, i, j); }
std::string idx(std::string_view stem, std::size_t i, std::size_t j, std::size_t k) {
  return fmt::format("{}_{}_{}_{}", stem, i, j, k);
}

Variable binary(std::string name) { return {std::move(name), VariableKind::kBinary, 0.0, 1.0}; }
Variable continuous(std::string name, double lo = 0.0, double hi = kInfinity) {
  return {std::move(name), VariableKind::kContinuous, lo, hi};
}
Variable general(std::string name, double lo = 0.0, double hi = kInfinity) {
  return {std::move(name), VariableKind::kInteger, lo, hi};
}

Constraint row(std::string name, Expression body, Relation rel, double rhs) {
  Constraint c;
  c.name = std::move(name);
  c.body = std::move(body);
  c.relation = rel;
  c.rhs = rhs;
  return c;
}

double round_to(double v, double step) { return std::round(v / step) * step; }

// The linear rows admit a point (objective ignored).
bool linear_rows_feasible(ProblemData pd) {
  pd.objective = Expression();
  SolverLimits limits;
  limits.time_limit = 10.0;
  return solve_builtin(pd, limits).status == SolveStatus::kOptimal;
}

// ---- knapsack -------------------------------------------------------------

std::optional<ProblemData> knapsack(ParamDraws& d) {
  const auto n = d.recorded_integer("n_items");
  std::vector<double> values, weights;
  for (std::int64_t i = 0; i < n; ++i) {
    values.push_back(static_cast<double>(d.integer("value_range")));
    weights.push_back(static_cast<double>(d.integer("weight_range")));
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double capacity = std::max(1.0, std::floor(d.real("capacity_ratio") * total));
  return build_knapsack(values, weights, capacity);
}

// ---- bin packing ----------------------------------------------------------

std::optional<ProblemData> bin_packing(ParamDraws& d) {
  const auto n = d.recorded_integer("n_items");
  std::vector<double> weights;
  for (std::int64_t i = 0; i < n; ++i) weights.push_back(static_cast<double>(d.integer("weight_range")));
  const double capacity = static_cast<double>(d.integer("bin_capacity"));
  if (*std::max_element(weights.begin(), weights.end()) > capacity) return std::nullopt;
  return build_bin_packing(weights, capacity);
}

// ---- assignment -----------------------------------------------------------

std::optional<ProblemData> assignment(ParamDraws& d) {
  const auto n = static_cast<std::size_t>(d.recorded_integer("n_agents"));
  std::vector<std::vector<double>> cost(n, std::vector<double>(n));
  for (auto& r : cost) {
    for (auto& c : r) c = static_cast<double>(d.integer("cost_range"));
  }
  return build_assignment(cost);
}

// ---- transportation -------------------------------------------------------

std::optional<ProblemData> transportation(ParamDraws& d) {
  const auto ns = static_cast<std::size_t>(d.recorded_integer("n_sources"));
  const auto nd = static_cast<std::size_t>(d.recorded_integer("n_sinks"));
  std::vector<double> supply(ns), demand(nd);
  for (auto& s : supply) s = static_cast<double>(d.integer("supply_range"));
  for (auto& x : demand) x = static_cast<double>(d.integer("demand_range"));
  if (std::accumulate(supply.begin(), supply.end(), 0.0) < std::accumulate(demand.begin(), demand.end(), 0.0)) {
    return std::nullopt;
  }
  ProblemData pd;
  pd.sense = ObjectiveSense::kMinimize;
  for (std::size_t i = 0; i < ns; ++i) {
    for (std::size_t j = 0; j < nd; ++j) {
      pd.variables.push_back(general(idx("ship", i, j)));
      pd.objective.add(Term::linear(static_cast<double>(d.integer("cost_range")), idx("ship", i, j)));
    }
  }
  for (std::size_t i = 0; i < ns; ++i) {
    Expression out;
    for (std::size_t j = 0; j < nd; ++j) out.add(Term::linear(1, idx("ship", i, j)));
    pd.constraints.push_back(row(idx("supply", i), out, Relation::kLessEqual, supply[i]));
  }
  for (std::size_t j = 0; j < nd; ++j) {
    Expression in;
    for (std::size_t i = 0; i < ns; ++i) in.add(Term::linear(1, idx("ship", i, j)));
    pd.constraints.push_back(row(idx("demand", j), in, Relation::kGreaterEqual, demand[j]));
  }
  return pd;
}

// ---- set cover ------------------------------------------------------------

std::optional<ProblemData> set_cover(ParamDraws& d) {
  const auto ne = static_cast<std::size_t>(d.recorded_integer("n_elements"));
  const auto ns = static_cast<std::size_t>(d.recorded_integer("n_sets"));
  const double density = d.real("density");
  std::vector<std::vector<std::size_t>> sets(ns);
  std::vector<bool> covered(ne, false);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t e = 0; e < ne; ++e) {
      if (d.rng().bernoulli(density)) {
        sets[s].push_back(e);
        covered[e] = true;
      }
    }
  }
  for (std::size_t e = 0; e < ne; ++e) {
    if (covered[e]) continue;
    auto& s = sets[d.rng().index(ns)];
    s.insert(std::upper_bound(s.begin(), s.end(), e), e);
  }
  std::vector<double> costs(ns);
  for (auto& c : costs) c = static_cast<double>(d.integer("cost_range"));
  return build_set_cover(ne, sets, costs);
}

// ---- capacitated facility location ----------------------------------------

std::optional<ProblemData> facility_location(ParamDraws& d) {
  const auto nf = static_cast<std::size_t>(d.recorded_integer("n_facilities"));
  const auto nc = static_cast<std::size_t>(d.recorded_integer("n_customers"));
  std::vector<double> demand(nc), capacity(nf), fixed(nf);
  for (auto& x : demand) x = static_cast<double>(d.integer("demand_range"));
  for (auto& x : capacity) x = static_cast<double>(d.integer("capacity_range"));
  for (auto& x : fixed) x = static_cast<double>(d.integer("fixed_cost_range"));
  if (std::accumulate(capacity.begin(), capacity.end(), 0.0) < std::accumulate(demand.begin(), demand.end(), 0.0)) {
    return std::nullopt;
  }
  ProblemData pd;
  for (std::size_t i = 0; i < nf; ++i) {
    pd.variables.push_back(binary(idx("open", i)));
    pd.objective.add(Term::linear(fixed[i], idx("open", i)));
  }
  for (std::size_t i = 0; i < nf; ++i) {
    for (std::size_t j = 0; j < nc; ++j) {
      pd.variables.push_back(continuous(idx("serve", i, j), 0.0, 1.0));
      pd.objective.add(Term::linear(static_cast<double>(d.integer("cost_range")) * demand[j], idx("serve", i, j)));
    }
  }
  for (std::size_t j = 0; j < nc; ++j) {
    Expression e;
    for (std::size_t i = 0; i < nf; ++i) e.add(Term::linear(1, idx("serve", i, j)));
    pd.constraints.push_back(row(idx("demand", j), e, Relation::kEqual, 1));
  }
  for (std::size_t i = 0; i < nf; ++i) {
    Expression e;
    for (std::size_t j = 0; j < nc; ++j) e.add(Term::linear(demand[j], idx("serve", i, j)));
    e.add(Term::linear(-capacity[i], idx("open", i)));
    pd.constraints.push_back(row(idx("capacity", i), e, Relation::kLessEqual, 0));
  }
  for (std::size_t i = 0; i < nf; ++i) {
    for (std::size_t j = 0; j < nc; ++j) {
      Expression e;
      e.add(Term::linear(1, idx("serve", i, j))).add(Term::linear(-1, idx("open", i)));
      pd.constraints.push_back(row(idx("link", i, j), e, Relation::kLessEqual, 0));
    }
  }
  return pd;
}

// ---- TSP with MTZ subtour elimination -------------------------------------

std::optional<ProblemData> tsp_mtz(ParamDraws& d) {
  const auto n = static_cast<std::size_t>(d.recorded_integer("n_cities"));
  std::vector<std::pair<double, double>> xy(n);
  for (auto& p : xy) {
    p.first = static_cast<double>(d.integer("coordinate_range"));
    p.second = static_cast<double>(d.integer("coordinate_range"));
  }
  ProblemData pd;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double dist = std::round(std::hypot(xy[i].first - xy[j].first, xy[i].second - xy[j].second));
      pd.variables.push_back(binary(idx("x", i, j)));
      pd.objective.add(Term::linear(std::max(1.0, dist), idx("x", i, j)));
    }
  }
  for (std::size_t i = 1; i < n; ++i) {
    pd.variables.push_back(continuous(idx("u", i), 1.0, static_cast<double>(n - 1)));
  }
  for (std::size_t i = 0; i < n; ++i) {
    Expression out, in;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      out.add(Term::linear(1, idx("x", i, j)));
      in.add(Term::linear(1, idx("x", j, i)));
    }
    pd.constraints.push_back(row(idx("leave", i), out, Relation::kEqual, 1));
    pd.constraints.push_back(row(idx("enter", i), in, Relation::kEqual, 1));
  }
  const double nn = static_cast<double>(n);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 1; j < n; ++j) {
      if (i == j) continue;
      Expression e;
      e.add(Term::linear(1, idx("u", i))).add(Term::linear(-1, idx("u", j))).add(Term::linear(nn, idx("x", i, j)));
      pd.constraints.push_back(row(idx("mtz", i, j), e, Relation::kLessEqual, nn - 1));
    }
  }
  return pd;
}

// ---- capacitated lot sizing -----------------------------------------------

std::optional<ProblemData> lot_sizing(ParamDraws& d) {
  const auto periods = static_cast<std::size_t>(d.recorded_integer("n_periods"));
  std::vector<double> demand(periods), capacity(periods);
  for (auto& x : demand) x = static_cast<double>(d.integer("demand_range"));
  for (auto& x : capacity) x = static_cast<double>(d.integer("capacity_range"));
  double cum_demand = 0.0, cum_capacity = 0.0;
  for (std::size_t t = 0; t < periods; ++t) {
    cum_demand += demand[t];
    cum_capacity += capacity[t];
    if (cum_capacity < cum_demand) return std::nullopt;
  }
  ProblemData pd;
  for (std::size_t t = 0; t < periods; ++t) {
    pd.variables.push_back(continuous(idx("produce", t), 0.0, capacity[t]));
    pd.variables.push_back(continuous(idx("stock", t)));
    pd.variables.push_back(binary(idx("setup", t)));
    pd.objective.add(Term::linear(static_cast<double>(d.integer("production_cost_range")), idx("produce", t)));
    pd.objective.add(Term::linear(static_cast<double>(d.integer("holding_cost_range")), idx("stock", t)));
    pd.objective.add(Term::linear(static_cast<double>(d.integer("setup_cost_range")), idx("setup", t)));
  }
  for (std::size_t t = 0; t < periods; ++t) {
    Expression e;
    if (t > 0) e.add(Term::linear(1, idx("stock", t - 1)));
    e.add(Term::linear(1, idx("produce", t))).add(Term::linear(-1, idx("stock", t)));
    pd.constraints.push_back(row(idx("balance", t), e, Relation::kEqual, demand[t]));
  }
  for (std::size_t t = 0; t < periods; ++t) {
    Constraint c = row(idx("setup_link", t), Expression::variable(idx("produce", t)), Relation::kLessEqual, 0);
    c.guard = IndicatorGuard{idx("setup", t), 0};
    pd.constraints.push_back(std::move(c));
  }
  return pd;
}

// ---- diet -----------------------------------------------------------------

std::optional<ProblemData> diet(ParamDraws& d) {
  const auto nf = static_cast<std::size_t>(d.recorded_integer("n_foods"));
  const auto nn = static_cast<std::size_t>(d.recorded_integer("n_nutrients"));
  const double max_servings = static_cast<double>(d.integer("max_servings"));
  const double fraction = d.real("requirement_fraction");
  ProblemData pd;
  for (std::size_t f = 0; f < nf; ++f) {
    pd.variables.push_back(continuous(idx("servings", f), 0.0, max_servings));
    pd.objective.add(Term::linear(static_cast<double>(d.integer("cost_range")), idx("servings", f)));
  }
  for (std::size_t k = 0; k < nn; ++k) {
    Expression e;
    double total = 0.0;
    for (std::size_t f = 0; f < nf; ++f) {
      const double a = static_cast<double>(d.integer("content_range"));
      total += a;
      e.add(Term::linear(a, idx("servings", f)));
    }
    if (total <= 0.0) return std::nullopt;
    const double need = std::max(1.0, std::floor(fraction * total * max_servings));
    pd.constraints.push_back(row(idx("nutrient", k), e, Relation::kGreaterEqual, need));
  }
  return pd;
}

// ---- production planning with big-M setup links ---------------------------

std::optional<ProblemData> production_bigm(ParamDraws& d) {
  const auto np = static_cast<std::size_t>(d.recorded_integer("n_products"));
  const auto nr = static_cast<std::size_t>(d.recorded_integer("n_resources"));
  const double big_m = static_cast<double>(d.integer("big_m"));
  ProblemData pd;
  pd.sense = ObjectiveSense::kMaximize;
  for (std::size_t p = 0; p < np; ++p) {
    pd.variables.push_back(continuous(idx("make", p)));
    pd.variables.push_back(binary(idx("setup", p)));
    pd.objective.add(Term::linear(static_cast<double>(d.integer("profit_range")), idx("make", p)));
    pd.objective.add(Term::linear(-static_cast<double>(d.integer("setup_cost_range")), idx("setup", p)));
  }
  for (std::size_t r = 0; r < nr; ++r) {
    Expression e;
    for (std::size_t p = 0; p < np; ++p) e.add(Term::linear(static_cast<double>(d.integer("usage_range")), idx("make", p)));
    pd.constraints.push_back(row(idx("resource", r), e, Relation::kLessEqual,
                                 static_cast<double>(d.integer("resource_capacity_range"))));
  }
  for (std::size_t p = 0; p < np; ++p) {
    Expression link;
    link.add(Term::linear(1, idx("make", p))).add(Term::linear(-big_m, idx("setup", p)));
    pd.constraints.push_back(row(idx("link", p), link, Relation::kLessEqual, 0));
    Expression lot;
    lot.add(Term::linear(1, idx("make", p)))
        .add(Term::linear(-static_cast<double>(d.integer("min_lot_range")), idx("setup", p)));
    pd.constraints.push_back(row(idx("min_lot", p), lot, Relation::kGreaterEqual, 0));
  }
  return pd;
}

// ---- multicommodity flow --------------------------------------------------

std::optional<ProblemData> multicommodity_flow(ParamDraws& d) {
  const auto n = static_cast<std::size_t>(d.recorded_integer("n_nodes"));
  const auto nk = static_cast<std::size_t>(d.recorded_integer("n_commodities"));
  const double density = d.real("arc_density");
  std::vector<std::pair<std::size_t, std::size_t>> arcs;
  for (std::size_t i = 0; i < n; ++i) {
    arcs.emplace_back(i, (i + 1) % n);
    arcs.emplace_back((i + 1) % n, i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || std::find(arcs.begin(), arcs.end(), std::make_pair(i, j)) != arcs.end()) continue;
      if (d.rng().bernoulli(density)) arcs.emplace_back(i, j);
    }
  }
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());
  std::vector<double> capacity(arcs.size()), cost(arcs.size());
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    capacity[a] = static_cast<double>(d.integer("capacity_range"));
    cost[a] = static_cast<double>(d.integer("cost_range"));
  }
  ProblemData pd;
  std::vector<std::vector<double>> supply(nk, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < nk; ++k) {
    const std::size_t o = d.rng().index(n);
    std::size_t t = d.rng().index(n - 1);
    if (t >= o) ++t;
    const double q = static_cast<double>(d.integer("demand_range"));
    supply[k][o] = q;
    supply[k][t] = -q;
  }
  for (std::size_t k = 0; k < nk; ++k) {
    for (std::size_t a = 0; a < arcs.size(); ++a) {
      const auto name = idx("flow", k, arcs[a].first, arcs[a].second);
      pd.variables.push_back(continuous(name));
      pd.objective.add(Term::linear(cost[a], name));
    }
  }
  for (std::size_t k = 0; k < nk; ++k) {
    for (std::size_t v = 0; v < n; ++v) {
      Expression e;
      for (const auto& [i, j] : arcs) {
        if (i == v) e.add(Term::linear(1, idx("flow", k, i, j)));
        if (j == v) e.add(Term::linear(-1, idx("flow", k, i, j)));
      }
      pd.constraints.push_back(row(idx("conserve", k, v), e, Relation::kEqual, supply[k][v]));
    }
  }
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    Expression e;
    for (std::size_t k = 0; k < nk; ++k) e.add(Term::linear(1, idx("flow", k, arcs[a].first, arcs[a].second)));
    pd.constraints.push_back(row(idx("capacity", arcs[a].first, arcs[a].second), e, Relation::kLessEqual, capacity[a]));
  }
  if (!linear_rows_feasible(normalize(pd))) return std::nullopt;
  return pd;
}

// ---- mean-variance portfolio ----------------------------------------------

std::optional<ProblemData> portfolio(ParamDraws& d) {
  const auto n = static_cast<std::size_t>(d.recorded_integer("n_assets"));
  const auto nf = static_cast<std::size_t>(d.integer("n_factors"));
  const double max_weight = d.real("max_weight");
  if (max_weight * static_cast<double>(n) < 1.0) return std::nullopt;
  std::vector<double> ret(n);
  for (auto& r : ret) r = round_to(d.real("return_range"), 1e-4);
  std::vector<std::vector<double>> load(n, std::vector<double>(nf));
  for (auto& r : load) {
    for (auto& x : r) x = d.real("loading_range");
  }
  std::vector<std::vector<double>> cov(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t f = 0; f < nf; ++f) s += load[i][f] * load[j][f];
      cov[i][j] = cov[j][i] = round_to(s, 1e-4);
    }
  }
  // Rounding moves each entry by at most 5e-5; the diagonal margin keeps the
  // matrix positive definite for every allowed size.
  for (std::size_t i = 0; i < n; ++i) cov[i][i] = round_to(cov[i][i] + d.real("idiosyncratic_range"), 1e-4);

  const auto [lo, hi] = std::minmax_element(ret.begin(), ret.end());
  const double target = round_to(*lo + d.real("target_fraction") * (*hi - *lo), 1e-4);

  ProblemData pd;
  for (std::size_t i = 0; i < n; ++i) pd.variables.push_back(continuous(idx("w", i), 0.0, max_weight));
  for (std::size_t i = 0; i < n; ++i) {
    pd.objective.add(Term(cov[i][i], {{idx("w", i), 2}}));
    for (std::size_t j = i + 1; j < n; ++j) {
      pd.objective.add(Term(2.0 * cov[i][j], {{idx("w", i), 1}, {idx("w", j), 1}}));
    }
  }
  Expression budget, expected;
  for (std::size_t i = 0; i < n; ++i) {
    budget.add(Term::linear(1, idx("w", i)));
    expected.add(Term::linear(ret[i], idx("w", i)));
  }
  pd.constraints.push_back(row("budget", budget, Relation::kEqual, 1));
  pd.constraints.push_back(row("min_return", expected, Relation::kGreaterEqual, target));
  if (!linear_rows_feasible(normalize(pd))) return std::nullopt;
  return pd;
}

std::vector<GeneratorClass> make_registry() {
  std::vector<GeneratorClass> r;
  r.push_back({{"knapsack",
                {int_range("n_items", 5, 15, 1, 200, "number of items"),
                 int_range("value_range", 1, 100, 0, 1e6, "item value draw range"),
                 int_range("weight_range", 1, 50, 1, 1e6, "item weight draw range"),
                 real("capacity_ratio", 0.5, 0.01, 10, "capacity as a fraction of total weight")},
                {"0-1 knapsack", "maximize sum v_i x_i s.t. sum w_i x_i <= C, x_i binary", "Martello and Toth (1990)"},
                "n_items"},
               knapsack});
  r.push_back({{"bin_packing",
                {int_range("n_items", 3, 10, 1, 60, "number of items (and candidate bins)"),
                 int_range("weight_range", 1, 50, 1, 1e6, "item weight draw range"),
                 integer("bin_capacity", 100, 1, 1e6, "uniform bin capacity")},
                {"bin packing",
                 "minimize sum_j y_j s.t. sum_i s_i x_ij <= c y_j for all j, sum_j x_ij = 1 for all i, x, y binary",
                 "Martello and Toth (1990)"},
                "n_items"},
               bin_packing});
  r.push_back({{"assignment",
                {int_range("n_agents", 3, 8, 1, 40, "agents and tasks"),
                 int_range("cost_range", 1, 100, 0, 1e6, "assignment cost draw range")},
                {"linear assignment", "minimize sum c_ij x_ij s.t. each agent and each task assigned once",
                 "Kuhn (1955)"},
                "n_agents"},
               assignment});
  r.push_back({{"transportation",
                {int_range("n_sources", 2, 5, 1, 20, "supply nodes"),
                 int_range("n_sinks", 2, 6, 1, 20, "demand nodes"),
                 int_range("supply_range", 20, 100, 0, 1e6, "supply draw range"),
                 int_range("demand_range", 10, 60, 0, 1e6, "demand draw range"),
                 int_range("cost_range", 1, 50, 0, 1e6, "unit shipping cost draw range")},
                {"integer transportation",
                 "minimize sum c_ij x_ij s.t. sum_j x_ij <= s_i, sum_i x_ij >= d_j, x integer",
                 "Hitchcock (1941)"},
                "n_sinks"},
               transportation});
  r.push_back({{"set_cover",
                {int_range("n_elements", 5, 15, 1, 100, "universe size"),
                 int_range("n_sets", 5, 15, 1, 100, "candidate sets"),
                 real("density", 0.3, 0.01, 1, "probability a set covers an element"),
                 int_range("cost_range", 1, 20, 0, 1e6, "set cost draw range")},
                {"weighted set cover", "minimize sum c_s x_s s.t. sum_{s covers e} x_s >= 1, x binary",
                 "Karp (1972)"},
                "n_sets"},
               set_cover});
  r.push_back({{"capacitated_facility_location",
                {int_range("n_facilities", 2, 5, 1, 20, "candidate facilities"),
                 int_range("n_customers", 3, 8, 1, 30, "customers"),
                 int_range("demand_range", 5, 30, 0, 1e6, "customer demand draw range"),
                 int_range("capacity_range", 30, 120, 0, 1e6, "facility capacity draw range"),
                 int_range("fixed_cost_range", 50, 200, 0, 1e6, "opening cost draw range"),
                 int_range("cost_range", 1, 20, 0, 1e6, "unit service cost draw range")},
                {"single-source-free capacitated facility location",
                 "minimize sum f_i y_i + sum c_ij d_j x_ij s.t. sum_i x_ij = 1, sum_j d_j x_ij <= u_i y_i, x_ij <= y_i",
                 "Cornuejols, Sridharan and Thizy (1991)"},
                "n_customers"},
               facility_location});
  r.push_back({{"tsp_mtz",
                {int_range("n_cities", 4, 6, 3, 15, "cities"),
                 int_range("coordinate_range", 0, 100, -1e6, 1e6, "integer coordinate draw range")},
                {"travelling salesman with MTZ subtour elimination",
                 "minimize sum d_ij x_ij s.t. degree rows, u_i - u_j + n x_ij <= n - 1 for i, j >= 1",
                 "Miller, Tucker and Zemlin (1960)"},
                "n_cities"},
               tsp_mtz});
  r.push_back({{"capacitated_lot_sizing",
                {int_range("n_periods", 3, 6, 1, 30, "planning periods"),
                 int_range("demand_range", 10, 50, 0, 1e6, "period demand draw range"),
                 int_range("capacity_range", 30, 80, 0, 1e6, "period capacity draw range"),
                 int_range("setup_cost_range", 50, 150, 0, 1e6, "setup cost draw range"),
                 int_range("holding_cost_range", 1, 5, 0, 1e6, "unit holding cost draw range"),
                 int_range("production_cost_range", 1, 10, 0, 1e6, "unit production cost draw range")},
                {"single-item capacitated lot sizing",
                 "minimize sum p_t x_t + h_t s_t + f_t y_t s.t. s_{t-1} + x_t - s_t = d_t, y_t = 0 -> x_t <= 0",
                 "Florian, Lenstra and Rinnooy Kan (1980)"},
                "n_periods"},
               lot_sizing});
  r.push_back({{"diet",
                {int_range("n_foods", 4, 10, 1, 100, "foods"),
                 int_range("n_nutrients", 2, 5, 1, 50, "nutrients"),
                 int_range("cost_range", 1, 10, 0, 1e6, "cost per serving draw range"),
                 int_range("content_range", 0, 20, 0, 1e6, "nutrient content draw range"),
                 integer("max_servings", 10, 1, 1e6, "serving cap per food"),
                 real("requirement_fraction", 0.3, 0.0, 1.0, "requirement as a fraction of the maximum intake")},
                {"diet problem", "minimize sum c_f x_f s.t. sum_f a_kf x_f >= r_k, 0 <= x_f <= m", "Stigler (1945)"},
                "n_foods"},
               diet});
  r.push_back({{"production_planning_bigm",
                {int_range("n_products", 2, 6, 1, 50, "products"),
                 int_range("n_resources", 1, 3, 1, 20, "shared resources"),
                 int_range("profit_range", 5, 30, 0, 1e6, "unit profit draw range"),
                 int_range("setup_cost_range", 10, 60, 0, 1e6, "setup cost draw range"),
                 int_range("usage_range", 1, 10, 1, 1e6, "resource usage draw range"),
                 int_range("resource_capacity_range", 50, 150, 0, 1e6, "resource capacity draw range"),
                 int_range("min_lot_range", 0, 5, 0, 1e6, "minimum lot draw range"),
                 integer("big_m", 1000, 1, 1e9, "big-M constant of the setup link")},
                {"production planning with setup costs",
                 "maximize sum p_i x_i - f_i y_i s.t. sum a_ri x_i <= b_r, x_i - M y_i <= 0, x_i - l_i y_i >= 0",
                 "Pochet and Wolsey (2006)"},
                "n_products"},
               production_bigm});
  r.push_back({{"multicommodity_flow",
                {int_range("n_nodes", 4, 7, 3, 30, "network nodes"),
                 int_range("n_commodities", 2, 3, 1, 10, "commodities"),
                 real("arc_density", 0.3, 0.0, 1.0, "probability of an extra arc beyond the ring"),
                 int_range("capacity_range", 10, 40, 0, 1e6, "arc capacity draw range"),
                 int_range("cost_range", 1, 10, 0, 1e6, "unit arc cost draw range"),
                 int_range("demand_range", 5, 15, 0, 1e6, "commodity demand draw range")},
                {"min-cost multicommodity flow",
                 "minimize sum c_a f_ka s.t. flow conservation per commodity and node, sum_k f_ka <= u_a",
                 "Ahuja, Magnanti and Orlin (1993)"},
                "n_nodes"},
               multicommodity_flow});
  r.push_back({{"portfolio_qp",
                {int_range("n_assets", 3, 8, 2, 30, "assets"),
                 int_range("n_factors", 1, 3, 1, 10, "risk factors"),
                 real_range("return_range", 0.02, 0.15, -1, 1, "expected return draw range"),
                 real_range("loading_range", -0.3, 0.3, -10, 10, "factor loading draw range"),
                 real_range("idiosyncratic_range", 0.01, 0.05, 0.01, 10, "idiosyncratic variance draw range"),
                 real("target_fraction", 0.5, 0.0, 1.0, "return target between the worst and best asset"),
                 real("max_weight", 1.0, 0.01, 1.0, "weight cap per asset")},
                {"mean-variance portfolio",
                 "minimize w' S w s.t. sum w_i = 1, sum r_i w_i >= target, 0 <= w_i <= cap",
                 "Markowitz (1952)"},
                "n_assets"},
               portfolio});
  return r;
}

}  // namespace

const std::vector<GeneratorClass>& registry() {
  static const std::vector<GeneratorClass> classes = make_registry();
  return classes;
}

ProblemData build_knapsack(const std::vector<double>& values, const std::vector<double>& weights, double capacity) {
  if (values.size() != weights.size() || values.empty()) throw ValidationError("knapsack needs matching, non-empty data");
  ProblemData pd;
  pd.sense = ObjectiveSense::kMaximize;
  Expression load;
  for (std::size_t i = 0; i < values.size(); ++i) {
    pd.variables.push_back(binary(idx("x", i)));
    pd.objective.add(Term::linear(values[i], idx("x", i)));
    load.add(Term::linear(weights[i], idx("x", i)));
  }
  pd.constraints.push_back(row("capacity", load, Relation::kLessEqual, capacity));
  return normalize(pd);
}

ProblemData build_bin_packing(const std::vector<double>& weights, double capacity) {
  if (weights.empty()) throw ValidationError("bin packing needs at least one item");
  const std::size_t n = weights.size();
  ProblemData pd;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) pd.variables.push_back(binary(idx("x", i, j)));
  }
  for (std::size_t j = 0; j < n; ++j) {
    pd.variables.push_back(binary(idx("y", j)));
    pd.objective.add(Term::linear(1, idx("y", j)));
  }
  for (std::size_t j = 0; j < n; ++j) {
    Expression e;
    for (std::size_t i = 0; i < n; ++i) e.add(Term::linear(weights[i], idx("x", i, j)));
    e.add(Term::linear(-capacity, idx("y", j)));
    pd.constraints.push_back(row(idx("Capacity", j), e, Relation::kLessEqual, 0));
  }
  for (std::size_t i = 0; i < n; ++i) {
    Expression e;
    for (std::size_t j = 0; j < n; ++j) e.add(Term::linear(1, idx("x", i, j)));
    pd.constraints.push_back(row(idx("Assignment", i), e, Relation::kEqual, 1));
  }
  return normalize(pd);
}

ProblemData build_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  if (n == 0) throw ValidationError("assignment needs at least one agent");
  ProblemData pd;
  for (std::size_t i = 0; i < n; ++i) {
    if (cost[i].size() != n) throw ValidationError("assignment cost matrix must be square");
    for (std::size_t j = 0; j < n; ++j) {
      pd.variables.push_back(binary(idx("x", i, j)));
      pd.objective.add(Term::linear(cost[i][j], idx("x", i, j)));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    Expression e;
    for (std::size_t j = 0; j < n; ++j) e.add(Term::linear(1, idx("x", i, j)));
    pd.constraints.push_back(row(idx("agent", i), e, Relation::kEqual, 1));
  }
  for (std::size_t j = 0; j < n; ++j) {
    Expression e;
    for (std::size_t i = 0; i < n; ++i) e.add(Term::linear(1, idx("x", i, j)));
    pd.constraints.push_back(row(idx("task", j), e, Relation::kEqual, 1));
  }
  return normalize(pd);
}

ProblemData build_set_cover(std::size_t n_elements, const std::vector<std::vector<std::size_t>>& sets,
                            const std::vector<double>& costs) {
  if (sets.empty() || sets.size() != costs.size()) throw ValidationError("set cover needs matching sets and costs");
  ProblemData pd;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    pd.variables.push_back(binary(idx("x", s)));
    pd.objective.add(Term::linear(costs[s], idx("x", s)));
  }
  for (std::size_t e = 0; e < n_elements; ++e) {
    Expression cover;
    for (std::size_t s = 0; s < sets.size(); ++s) {
      if (std::find(sets[s].begin(), sets[s].end(), e) != sets[s].end()) cover.add(Term::linear(1, idx("x", s)));
    }
    pd.constraints.push_back(row(idx("cover", e), cover, Relation::kGreaterEqual, 1));
  }
  return normalize(pd);
}

}  // namespace optsynth
