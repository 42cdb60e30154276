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
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "optsynth/errors.hpp"
#include "optsynth/tuner.hpp"

namespace optsynth {

namespace {

constexpr const char* kComponentNames[] = {"n_bin", "n_int",  "n_cont", "n_lin",    "n_indic",
                                           "n_quad", "n_gen", "f_bigm", "avg_terms"};

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

std::string percent(double fraction) { return fmt::format("{:.1f}", 100.0 * fraction); }

std::string describe(const Distribution& d) {
  if (d.count == 0) return "\n   - no OPTIMAL instances";
  return fmt::format("\n   - Min: {}, Max: {}, Mean: {}, Std: {}", format_number(d.min), format_number(d.max),
                     format_number(d.mean), format_number(d.stddev));
}

std::string interval(double lo, double hi) { return fmt::format("[{}, {}]", format_number(lo), format_number(hi)); }

enum class Direction { kGrow, kShrink };

Direction direction(const BatchStats& s, const TuningTargets& t) {
  if (s.generated == 0 || std::isnan(s.mean_complexity)) return Direction::kShrink;
  if (s.mean_complexity < t.complexity_min) return Direction::kGrow;
  if (s.mean_complexity > t.complexity_max) return Direction::kShrink;
  if (s.mean_solve_time > t.time_max || s.feasibility_rate < t.feasibility_target) return Direction::kShrink;
  if (s.mean_solve_time < t.time_min) return Direction::kGrow;
  return Direction::kShrink;
}

std::string extract_json_object(const std::string& reply) {
  const auto fence = reply.find("```json");
  if (fence != std::string::npos) {
    const auto start = reply.find('\n', fence);
    const auto stop = start == std::string::npos ? std::string::npos : reply.find("```", start);
    if (stop != std::string::npos) return reply.substr(start + 1, stop - start - 1);
  }
  const auto open = reply.find('{');
  const auto close = reply.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw ParseError("reply contains no JSON object", 0, 0);
  }
  return reply.substr(open, close - open + 1);
}

std::string expected_keys(const GeneratorSchema& schema) {
  std::string keys;
  for (const auto& d : schema.parameters) keys += (keys.empty() ? "" : ", ") + d.name;
  return "A JSON object with exactly these keys: " + keys + ". Ranges are two-element lists.";
}

void append_log(const std::filesystem::path& path, const TuneStep& step) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot write tuning log " + path.string());
  out << step.to_json().dump() << '\n';
}

}  // namespace

// ---- targets and statistics -----------------------------------------------

void TuningTargets::check() const {
  if (!std::isfinite(complexity_min) || !std::isfinite(complexity_max) || complexity_min > complexity_max) {
    throw ConfigError("complexity range must be finite with min <= max");
  }
  if (!finite_nonneg(time_min) || !finite_nonneg(time_max) || time_min > time_max || time_max <= 0.0) {
    throw ConfigError("time range must satisfy 0 <= min <= max and max > 0");
  }
  if (!(feasibility_target >= 0.0 && feasibility_target <= 1.0)) {
    throw ConfigError("feasibility target must lie in [0, 1]");
  }
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (max_iterations < 1) throw ConfigError("max iterations must be at least 1");
}

nlohmann::json TuningTargets::to_json() const {
  return {{"complexity_range", {complexity_min, complexity_max}},
          {"time_range", {time_min, time_max}},
          {"feasibility_target", feasibility_target},
          {"batch_size", batch_size},
          {"max_iterations", max_iterations}};
}

Distribution Distribution::of(const std::vector<double>& values) {
  Distribution d;
  d.count = values.size();
  if (values.empty()) return d;
  d.min = *std::min_element(values.begin(), values.end());
  d.max = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  d.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - d.mean) * (v - d.mean);
  d.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return d;
}

nlohmann::json Distribution::to_json() const {
  return {{"count", count}, {"min", min}, {"max", max}, {"mean", mean}, {"stddev", stddev}};
}

nlohmann::json BatchStats::to_json() const {
  nlohmann::json comps = nlohmann::json::object();
  for (const auto& [k, d] : components) comps[k] = d.to_json();
  nlohmann::json items = nlohmann::json::array();
  for (const auto& r : instances) {
    nlohmann::json j = {{"seed", r.seed}, {"status", r.status}, {"solve_time", r.solve_time}};
    if (r.report) j["score"] = r.report->score;
    items.push_back(std::move(j));
  }
  return {{"total", total},
          {"generated", generated},
          {"mean_complexity", std::isnan(mean_complexity) ? nlohmann::json(nullptr) : nlohmann::json(mean_complexity)},
          {"mean_solve_time", mean_solve_time},
          {"feasibility_rate", feasibility_rate},
          {"optimal_rate", optimal_rate},
          {"components", std::move(comps)},
          {"status_histogram", status_histogram},
          {"instances", std::move(items)}};
}

BatchStats evaluate_batch(const GeneratorConfig& cfg, const TuningTargets& targets, const EvaluationOptions& options) {
  targets.check();
  const auto batch = generate_batch(cfg, targets.batch_size, std::max<std::size_t>(1, options.jobs));
  std::vector<InstanceResult> results(batch.size());

  SolverConfig solver = options.solver;
  solver.limits.time_limit = targets.time_max;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < batch.size(); i = next++) {
      auto& r = results[i];
      r.seed = batch[i].seed;
      if (!batch[i].problem) {
        r.status = "generation-error";
        continue;
      }
      const auto& pd = *batch[i].problem;
      try {
        r.report = score(pd, options.weights, options.bigm_threshold);
      } catch (const Error&) {
        r.status = "score-error";
        continue;
      }
      const auto outcome = solve(pd, solver);
      r.status = std::string(to_string(outcome.status));
      r.solve_time = outcome.solve_time;
      if (options.work_unit) {
        if (auto it = outcome.info.find("lp_iterations"); it != outcome.info.end()) {
          r.solve_time = std::stod(it->second) * *options.work_unit;
        }
      }
      if (outcome.status == SolveStatus::kTimeLimit) r.solve_time = std::max(r.solve_time, targets.time_max);
      r.counts_feasible = outcome.status == SolveStatus::kOptimal ||
                          (options.convention == FeasibilityConvention::kAnyFeasible &&
                           outcome.status == SolveStatus::kTimeLimit && outcome.info.count("incumbent"));
    }
  };
  const std::size_t jobs = std::min(std::max<std::size_t>(1, options.jobs), batch.size());
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  BatchStats s;
  s.total = results.size();
  std::vector<std::vector<double>> comps(std::size(kComponentNames));
  std::vector<double> scores, times;
  std::size_t feasible = 0, optimal = 0;
  for (const auto& r : results) {
    ++s.status_histogram[r.status];
    feasible += r.counts_feasible;
    optimal += r.status == "optimal";
    if (!r.report) continue;
    ++s.generated;
    const auto c = r.report->components();
    for (std::size_t k = 0; k < c.size(); ++k) comps[k].push_back(c[k]);
    scores.push_back(r.report->score);
    times.push_back(r.solve_time);
  }
  for (std::size_t k = 0; k < comps.size(); ++k) s.components[kComponentNames[k]] = Distribution::of(comps[k]);
  s.components["score"] = Distribution::of(scores);
  s.components["solve_time"] = Distribution::of(times);
  s.mean_complexity = scores.empty() ? std::numeric_limits<double>::quiet_NaN() : s.components["score"].mean;
  s.mean_solve_time = s.components["solve_time"].mean;
  s.feasibility_rate = static_cast<double>(feasible) / static_cast<double>(s.total);
  s.optimal_rate = static_cast<double>(optimal) / static_cast<double>(s.total);
  s.instances = std::move(results);
  return s;
}

bool accept(const BatchStats& stats, const TuningTargets& targets) {
  return stats.generated > 0 && stats.mean_complexity >= targets.complexity_min &&
         stats.mean_complexity <= targets.complexity_max && stats.mean_solve_time <= targets.time_max &&
         stats.feasibility_rate >= targets.feasibility_target;
}

nlohmann::json TuneStep::to_json() const {
  nlohmann::json j = {{"iteration", iteration}, {"accepted", accepted}};
  if (proposal) {
    j["proposal"] = {{"parameters", params_to_json(proposal->parameters)}, {"rationale", proposal->rationale}};
  }
  if (!advisor_error.empty()) j["advisor_error"] = advisor_error;
  if (stats) j["stats"] = stats->to_json();
  return j;
}

nlohmann::json TuneResult::to_json() const {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : trace) steps.push_back(s.to_json());
  nlohmann::json j = {{"iterations", iterations}, {"trace", std::move(steps)}};
  if (config) {
    j["config"] = {{"class_id", config->class_id},
                   {"parameters", params_to_json(config->parameters)},
                   {"seed", config->seed}};
  } else {
    j["failure"] = failure;
  }
  return j;
}

// ---- advisors -------------------------------------------------------------

AdvisorOutcome RuleBasedAdvisor::propose(const AdvisorContext& ctx) {
  AdvisorOutcome out;
  const auto* decl = ctx.schema.find(ctx.schema.size_parameter);
  if (decl == nullptr || decl->type != ParamType::kIntRange) {
    out.error = "class '" + ctx.schema.class_id + "' has no integer-range size parameter";
    out.exhausted = true;
    return out;
  }
  const auto defaults = resolve_parameters(ctx.schema, {ctx.schema.class_id, {}, 0});
  const auto default_range = std::get<IntRange>(defaults.at(decl->name));

  std::vector<const TuneStep*> probes;
  for (const auto& step : ctx.history) {
    if (step.proposal && step.stats) probes.push_back(&step);
  }
  if (probes.empty()) {
    out.proposal = AdvisorProposal{defaults, "schema defaults"};
    return out;
  }

  auto lo = static_cast<std::int64_t>(std::ceil(decl->min));
  auto hi = static_cast<std::int64_t>(std::floor(decl->max));
  bool point_probed = false;
  for (const auto* step : probes) {
    const auto it = step->proposal->parameters.find(decl->name);
    const IntRange r = it == step->proposal->parameters.end() ? default_range : std::get<IntRange>(it->second);
    point_probed = point_probed || r.low == r.high;
    if (direction(*step->stats, ctx.targets) == Direction::kGrow) {
      lo = std::max(lo, r.low + 1);
    } else {
      hi = std::min(hi, r.high - 1);
    }
  }
  if (lo > hi) {
    out.error = fmt::format("no value of {} satisfies the targets", decl->name);
    out.exhausted = true;
    return out;
  }
  std::int64_t p = lo + (hi - lo) / 2;
  if (!point_probed) p = std::clamp(default_range.low + (default_range.high - default_range.low) / 2, lo, hi);

  auto params = defaults;
  params[decl->name] = IntRange{p, p};
  out.proposal = AdvisorProposal{params, fmt::format("{} = {} within bracket [{}, {}]", decl->name, p, lo, hi)};
  return out;
}

ParamMap parse_parameter_reply(const GeneratorSchema& schema, const std::string& reply) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(extract_json_object(reply));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("reply is not valid JSON: ") + e.what(), 0, 0);
  }
  if (!j.is_object()) throw ParseError("reply is not a JSON object", 0, 0);
  if (j.size() == 1 && j.begin().key() == "parameters" && j.begin()->is_object() && !schema.find("parameters")) {
    j = *j.begin();
  }
  for (const auto& d : schema.parameters) {
    if (!j.contains(d.name)) throw ConfigError("reply is missing key '" + d.name + "'");
  }
  for (const auto& [k, v] : j.items()) {
    if (!schema.find(k)) throw ConfigError("reply has unknown key '" + k + "'");
  }
  auto params = params_from_json(schema, j);
  check_config(schema, {schema.class_id, params, 0});
  return params;
}

Bindings init_config_bindings(const GeneratorSchema& schema, const TuningTargets& targets,
                              const ComplexityWeights& weights) {
  const auto defaults = resolve_parameters(schema, {schema.class_id, {}, 0});
  return {{"generator_code", schema.to_json().dump(2)},
          {"default_parameters", params_to_json(defaults).dump(2)},
          {"alpha_bin", format_number(weights.alpha_bin)},
          {"alpha_int", format_number(weights.alpha_int)},
          {"alpha_cont", format_number(weights.alpha_cont)},
          {"beta_lin", format_number(weights.beta_lin)},
          {"beta_indic", format_number(weights.beta_indic)},
          {"beta_quad", format_number(weights.beta_quad)},
          {"beta_gen", format_number(weights.beta_gen)},
          {"gamma_bigm", format_number(weights.gamma_bigm)},
          {"delta_expr", format_number(weights.delta_expr)},
          {"complexity_score_min", format_number(targets.complexity_min)},
          {"complexity_score_max", format_number(targets.complexity_max)},
          {"min_solve_time", format_number(targets.time_min)},
          {"max_solve_time", format_number(targets.time_max)}};
}

Bindings refine_config_bindings(const ParamMap& last, const BatchStats& stats, const TuningTargets& targets) {
  const double total = static_cast<double>(std::max<std::size_t>(1, stats.total));
  std::size_t solvable = 0, optimal = 0, score_ok = 0, time_ok = 0;
  std::vector<double> scores, times;
  std::map<std::string, std::vector<double>> structure;
  for (const auto& r : stats.instances) {
    solvable += r.status == "optimal" || r.status == "time-limit";
    if (r.status != "optimal" || !r.report) continue;
    ++optimal;
    scores.push_back(r.report->score);
    times.push_back(r.solve_time);
    score_ok += r.report->score >= targets.complexity_min && r.report->score <= targets.complexity_max;
    time_ok += r.solve_time >= targets.time_min && r.solve_time <= targets.time_max;
    const auto c = r.report->components();
    for (std::size_t k = 0; k < c.size(); ++k) structure[kComponentNames[k]].push_back(c[k]);
  }

  std::string hist, pct;
  for (const auto& [status, n] : stats.status_histogram) {
    hist += fmt::format("     - {}: {}\n", status, n);
    pct += fmt::format("     - {}: {}%\n", status, percent(static_cast<double>(n) / total));
  }
  if (!hist.empty()) hist.pop_back();
  if (!pct.empty()) pct.pop_back();

  static const std::vector<std::pair<const char*, const char*>> kLabels = {
      {"n_bin", "Binary Variables"},        {"n_int", "Integer Variables"},
      {"n_cont", "Continuous Variables"},   {"n_lin", "Linear Constraints"},
      {"n_indic", "Indicator Constraints"}, {"n_quad", "Quadratic Constraints"},
      {"n_gen", "General Constraints"},     {"f_bigm", "Big-M Constraints"},
      {"avg_terms", "Average Terms per Expression"}};
  std::string shape;
  for (const auto& [key, label] : kLabels) {
    const auto d = Distribution::of(structure[key]);
    shape += fmt::format("   {}: mean {}, min {}, max {}\n", label, format_number(d.mean), format_number(d.min),
                         format_number(d.max));
  }
  if (!shape.empty()) shape.pop_back();

  std::string insights;
  const auto sd = Distribution::of(scores);
  if (sd.count > 0) {
    if (sd.mean < targets.complexity_min) insights += "   - Mean complexity is below the required range.\n";
    if (sd.mean > targets.complexity_max) insights += "   - Mean complexity is above the required range.\n";
    if (sd.mean > 0 && sd.stddev / sd.mean > 0.25) insights += "   - Complexity varies strongly between instances.\n";
  } else {
    insights += "   - No instance reached OPTIMAL status.\n";
  }
  if (stats.mean_solve_time > targets.time_max) insights += "   - Mean solve time exceeds the limit.\n";
  if (!insights.empty()) insights.pop_back();

  return {{"total_instances", std::to_string(stats.total)},
          {"last_suggested_parameters", params_to_json(last).dump(2)},
          {"solvable_instances", std::to_string(solvable)},
          {"optimal_instances", std::to_string(optimal)},
          {"optimal_rate", percent(static_cast<double>(optimal) / total)},
          {"status_distribution", hist},
          {"status_percentages", pct},
          {"success_rate", percent(static_cast<double>(optimal) / total)},
          {"complexity_distribution", describe(sd)},
          {"complexity_requirement", interval(targets.complexity_min, targets.complexity_max)},
          {"complexity_success_rate", fmt::format("{}/{}", score_ok, stats.total)},
          {"time_distribution", describe(Distribution::of(times))},
          {"time_requirement", interval(targets.time_min, targets.time_max)},
          {"time_success_rate", fmt::format("{}/{}", time_ok, stats.total)},
          {"structure_analysis", shape},
          {"insights", insights}};
}

AdvisorOutcome LlmAdvisor::propose(const AdvisorContext& ctx) {
  AdvisorOutcome out;
  const TuneStep* last = nullptr;
  for (const auto& step : ctx.history) {
    if (step.proposal && step.stats) last = &step;
  }
  try {
    const auto exchange =
        last == nullptr
            ? gateway_.ask(PromptId::kInitConfig, init_config_bindings(ctx.schema, ctx.targets, ctx.weights))
            : gateway_.ask(PromptId::kRefineConfig,
                           refine_config_bindings(last->proposal->parameters, *last->stats, ctx.targets));
    try {
      out.proposal = AdvisorProposal{parse_parameter_reply(ctx.schema, exchange.response), exchange.response};
    } catch (const Error& first) {
      const auto repair = gateway_.ask(PromptId::kFormatRepair, {{"error", first.what()},
                                                                  {"previous_response", exchange.response},
                                                                  {"expected_format", expected_keys(ctx.schema)}});
      try {
        out.proposal = AdvisorProposal{parse_parameter_reply(ctx.schema, repair.response), repair.response};
      } catch (const Error& second) {
        out.error = std::string("malformed proposal after repair: ") + second.what();
      }
    }
  } catch (const GatewayError& e) {
    out.error = e.what();
  }
  return out;
}

// ---- loop -----------------------------------------------------------------

TuneResult tune(const GeneratorSchema& schema, const TuningTargets& targets, Advisor& advisor,
                const TuneOptions& options) {
  targets.check();
  TuneResult result;
  for (int t = 1; t <= targets.max_iterations; ++t) {
    TuneStep step;
    step.iteration = t;
    AdvisorOutcome outcome;
    try {
      outcome = advisor.propose({schema, targets, options.evaluation.weights, t, result.trace});
    } catch (const Error& e) {
      outcome.error = e.what();
    }
    bool stop = false;
    if (outcome.proposal) {
      GeneratorConfig cfg{schema.class_id, outcome.proposal->parameters, options.seed};
      try {
        check_config(schema, cfg);
        step.proposal = outcome.proposal;
        step.stats = options.evaluator ? options.evaluator(cfg) : evaluate_batch(cfg, targets, options.evaluation);
        step.accepted = accept(*step.stats, targets);
        if (step.accepted) result.config = cfg;
      } catch (const ConfigError& e) {
        step.advisor_error = std::string("invalid proposal: ") + e.what();
      }
    } else {
      step.advisor_error = outcome.error.empty() ? "advisor returned no proposal" : outcome.error;
      stop = outcome.exhausted;
    }
    result.trace.push_back(step);
    if (options.log_path) append_log(*options.log_path, step);
    result.iterations = t;
    if (step.accepted) return result;
    if (stop) {
      result.failure = "advisor exhausted: " + step.advisor_error;
      return result;
    }
  }
  result.failure = fmt::format("no accepted configuration after {} iterations", targets.max_iterations);
  return result;
}

}  // namespace optsynth
