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

// Rewrites accepted descriptions with an augmentation rule and keeps the
// rewrites whose two independent formulations agree on the optimum.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "optsynth/llm.hpp"
#include "optsynth/model.hpp"
#include "optsynth/solver.hpp"
#include "optsynth/synthesis.hpp"

namespace optsynth {

inline constexpr const char* kAugmentedSchema = "optsynth.augmented/1";

struct AugmentationRule {
  std::string id;
  std::string category;  // semantic, scenario, numerical, variant, complication, multi-objective, symmetry
  std::string instruction;
};

const std::vector<AugmentationRule>& augmentation_rules();
// Throws ConfigError for an unknown id.
const AugmentationRule& find_rule(std::string_view id);

struct SampleOutcome {
  int sample = 0;
  int instruction_variant = 0;
  std::string mf;
  std::optional<ProblemData> pd;
  SolveStatus status = SolveStatus::kError;
  std::optional<double> ov;
  std::string error;  // formulation failure, empty otherwise

  bool optimal() const { return status == SolveStatus::kOptimal && ov.has_value(); }
  nlohmann::json to_json() const;
  static SampleOutcome from_json(const nlohmann::json& j);
};

struct AugmentedCandidate {
  std::string id;  // <source id>/aug<attempt>
  std::string source_id;
  std::string rule_id;
  int attempt = 0;
  std::string nl_aug;
  std::vector<SampleOutcome> samples;
  bool qualified = false;
  std::string reason;  // empty when qualified
  // Ground truth taken from the first sample when qualified.
  std::optional<ProblemData> pd;
  std::optional<double> ov;
  std::string class_id;
  std::string tier;
  std::string scenario;

  nlohmann::json to_json() const;
  static AugmentedCandidate from_json(const nlohmann::json& j);
};

struct AugmentOptions {
  double eps = 1e-6;
  std::uint64_t seed = 0;
  SolverConfig solver;
  std::size_t jobs = 1;
  int attempt_cap_factor = 3;
};

// Throws ConfigError unless the record is accepted. Never throws for model or
// solver failures; those disqualify the candidate.
AugmentedCandidate augment_one(Gateway& gateway, const TripletRecord& record, const AugmentationRule& rule,
                               int attempt = 0, const AugmentOptions& options = {});

// Qualification from two sample outcomes; returns the reject reason or empty.
std::string qualification_reason(const SampleOutcome& first, const SampleOutcome& second, double eps);

struct AugmentRun {
  std::vector<AugmentedCandidate> candidates;  // record order, then attempt order
  std::map<std::string, int> qualified;        // per source record
  std::map<std::string, int> shortfall;        // records that hit the attempt cap
};

// Draws a rule uniformly per attempt from a per-record seeded stream and stops
// at target_per_record qualified candidates or target * attempt_cap_factor
// attempts.
AugmentRun augment_corpus(Gateway& gateway, const std::vector<TripletRecord>& records,
                          const std::vector<AugmentationRule>& rules, int target_per_record,
                          const AugmentOptions& options = {});

void write_candidates(const std::filesystem::path& path, const std::vector<AugmentedCandidate>& candidates);
std::vector<AugmentedCandidate> read_candidates(const std::filesystem::path& path);

}  // namespace optsynth
