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

// Configuration search for instance generators: evaluate a batch, check it
// against complexity, time and feasibility targets, and ask an advisor for
// the next parameters until a batch is accepted.

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "optsynth/complexity.hpp"
#include "optsynth/generators.hpp"
#include "optsynth/llm.hpp"
#include "optsynth/solver.hpp"

namespace optsynth {

struct TuningTargets {
  double complexity_min = 25.0;
  double complexity_max = 75.0;
  double time_min = 0.0;  // seconds
  double time_max = 60.0;
  double feasibility_target = 0.9;
  std::size_t batch_size = 10;
  int max_iterations = 10;

  // Throws ConfigError when an interval is reversed, a bound is negative or
  // not finite, the target is outside [0, 1], or a count is zero.
  void check() const;
  nlohmann::json to_json() const;
};

enum class FeasibilityConvention { kOptimalOnly, kAnyFeasible };

struct Distribution {
  std::size_t count = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // population

  static Distribution of(const std::vector<double>& values);
  nlohmann::json to_json() const;
};

struct InstanceResult {
  std::uint64_t seed = 0;
  std::string status;  // solve status, or "generation-error" / "solve-error"
  std::optional<ComplexityReport> report;
  double solve_time = 0.0;
  bool counts_feasible = false;
};

struct BatchStats {
  std::size_t total = 0;
  std::size_t generated = 0;
  double mean_complexity = 0.0;  // NaN when nothing was generated
  double mean_solve_time = 0.0;
  double feasibility_rate = 0.0;
  double optimal_rate = 0.0;
  std::map<std::string, Distribution> components;  // ComplexityReport fields plus solve_time
  std::map<std::string, std::size_t> status_histogram;
  std::vector<InstanceResult> instances;

  nlohmann::json to_json() const;
};

struct EvaluationOptions {
  SolverConfig solver;  // time limit is replaced by the target's time_max
  ComplexityWeights weights;
  double bigm_threshold = kDefaultBigMThreshold;
  FeasibilityConvention convention = FeasibilityConvention::kOptimalOnly;
  std::size_t jobs = 1;
  // When set, solve time is lp_iterations * work_unit seconds instead of wall
  // clock, which makes batch statistics reproducible.
  std::optional<double> work_unit;
};

// Generates targets.batch_size instances, scores and solves each under
// targets.time_max. Generation and solver failures land in the status
// histogram. Mean complexity is over generated instances; mean time is over
// generated instances with time-limited ones counted at no less than time_max.
BatchStats evaluate_batch(const GeneratorConfig& cfg, const TuningTargets& targets,
                          const EvaluationOptions& options = {});

// S in [min, max], mean time <= time_max and feasibility >= target.
bool accept(const BatchStats& stats, const TuningTargets& targets);

struct AdvisorProposal {
  ParamMap parameters;
  std::string rationale;
};

struct TuneStep {
  int iteration = 0;
  std::optional<AdvisorProposal> proposal;
  std::string advisor_error;
  std::optional<BatchStats> stats;
  bool accepted = false;

  nlohmann::json to_json() const;
};

struct AdvisorContext {
  const GeneratorSchema& schema;
  const TuningTargets& targets;
  const ComplexityWeights& weights;
  int iteration = 1;
  const std::vector<TuneStep>& history;
};

struct AdvisorOutcome {
  std::optional<AdvisorProposal> proposal;
  std::string error;
  bool exhausted = false;  // no further proposals; tune stops
};

class Advisor {
 public:
  virtual ~Advisor() = default;
  virtual AdvisorOutcome propose(const AdvisorContext& context) = 0;
  virtual std::string id() const = 0;
};

// Bracketing search over the schema's size parameter. The first proposal is
// the defaults, the second the midpoint of the default range, then
// bisection. A batch with mean score below the window (or mean time below
// time_min) moves the bracket up; a batch above the window, too slow or
// short of the feasibility target moves it down.
class RuleBasedAdvisor : public Advisor {
 public:
  AdvisorOutcome propose(const AdvisorContext& context) override;
  std::string id() const override { return "rule-based"; }
};

// Asks a language model through the init_config and refine_config prompts.
// A reply that is not a JSON object with exactly the schema's keys gets one
// format_repair re-ask.
class LlmAdvisor : public Advisor {
 public:
  explicit LlmAdvisor(Gateway& gateway) : gateway_(gateway) {}
  AdvisorOutcome propose(const AdvisorContext& context) override;
  std::string id() const override { return "llm:" + gateway_.backend_id(); }

 private:
  Gateway& gateway_;
};

// Extracts the first JSON object from a model reply (a ```json block when
// present) and checks its keys against the schema. Throws ParseError or
// ConfigError.
ParamMap parse_parameter_reply(const GeneratorSchema& schema, const std::string& reply);

// Bindings for the two configuration prompts.
Bindings init_config_bindings(const GeneratorSchema& schema, const TuningTargets& targets,
                              const ComplexityWeights& weights);
Bindings refine_config_bindings(const ParamMap& last, const BatchStats& stats, const TuningTargets& targets);

struct TuneOptions {
  std::uint64_t seed = 0;
  EvaluationOptions evaluation;
  std::optional<std::filesystem::path> log_path;  // JSONL, one line per iteration
  // Replaces evaluate_batch, for tests.
  std::function<BatchStats(const GeneratorConfig&)> evaluator;
};

struct TuneResult {
  std::optional<GeneratorConfig> config;
  int iterations = 0;
  std::vector<TuneStep> trace;
  std::string failure;

  nlohmann::json to_json() const;
};

// Runs at most targets.max_iterations iterations. Every iteration evaluates
// with the same master seed.
TuneResult tune(const GeneratorSchema& schema, const TuningTargets& targets, Advisor& advisor,
                const TuneOptions& options = {});

}  // namespace optsynth
