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

// Bidirectional synthesis: backtranslate a source instance into prose,
// formulate the prose back into a model, and keep the triplet only when both
// models have the same optimal value.

#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "optsynth/complexity.hpp"
#include "optsynth/llm.hpp"
#include "optsynth/model.hpp"
#include "optsynth/random.hpp"
#include "optsynth/solver.hpp"

namespace optsynth {

inline constexpr const char* kTripletSchema = "optsynth.triplet/1";

// Thrown by synthesis stages; `stage` names the phase that failed.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

const std::vector<std::string>& default_scenarios();

struct SynthesisOptions {
  int refine_rounds = 1;  // T
  double eps = 1e-6;
  std::uint64_t seed = 0;
  std::vector<std::string> scenarios = default_scenarios();
  std::string examples;  // optional reference examples for the first prompt
  SolverConfig solver;
  std::size_t jobs = 1;
};

struct BacktranslationResult {
  std::string nl;
  int iterations_used = 0;
  std::vector<std::string> criticisms;
  std::vector<std::string> refinements;
  std::string scenario_tag;
};

// `rng` picks the scenario tag. Gateway failures come back as StageError
// with stage "initial_generation", "self_criticism" or "self_refinement".
BacktranslationResult backtranslate(Gateway& gateway, const std::string& mf, const ProblemData& pd, int rounds,
                                    Rng& rng, const std::vector<std::string>& scenarios = default_scenarios(),
                                    const std::string& examples = {});

// True for a criticism that reports a complete instance.
bool criticism_is_complete(const std::string& criticism);

struct ForwardModelResult {
  std::string mf;
  ProblemData pd_prime;
  std::string raw_response;
  int instruction_variant = 0;
  bool repaired = false;
};

// Reads the model document from a formulation reply: the ```json block when
// present, otherwise the outermost braces; a {"model": {...}} wrapper is
// unwrapped. The formulation text is everything before the document. The
// result is normalized and validated. Throws ParseError or ValidationError.
ForwardModelResult parse_formulation_reply(const std::string& reply);

// Asks for a formulation with instruction variant `variant`; one
// format_repair round on a parse failure, then StageError "autoformulation".
ForwardModelResult autoformulate(Gateway& gateway, const std::string& nl, int variant = 0, int sample = 0);

enum class Verdict { kAccepted, kRejected };
std::string_view to_string(Verdict v);

struct VerifyResult {
  Verdict verdict = Verdict::kRejected;
  std::string reason;  // empty when accepted
  SolveOutcome source;
  SolveOutcome prime;
};

// Both sides go through the same solver. Reasons: solver-error,
// source-not-optimal, formulation-not-optimal, value-mismatch.
VerifyResult verify(const ProblemData& pd, const ProblemData& pd_prime, double eps = 1e-6,
                    const SolverConfig& solver = {});

struct SourceInstance {
  std::string id;
  ProblemData pd;
  std::string mf;
  std::string class_id;
  std::uint64_t seed = 0;
  std::string config;  // generator parameters as JSON text
  double score = 0.0;
  std::string tier;
};

// Builds a source from a generated instance: id is the instance name, mf the
// class formulation, tier the primary tier of its score.
SourceInstance make_source(const ProblemData& pd, const std::vector<DifficultyTier>& tiers = default_tiers());

// Among the tiers containing `score`, the one whose midpoint is nearest
// (lower tier on ties); "none" when no tier contains it.
std::string primary_tier(double score, const std::vector<DifficultyTier>& tiers);

struct TripletRecord {
  std::string id;
  std::string nl;
  std::string mf;        // source formulation
  std::string mf_prime;  // formulation returned by the model
  std::optional<ProblemData> pd_prime;
  std::string pd_prime_lp;
  ProblemData source;
  std::optional<double> ov;
  std::optional<double> ov_prime;
  std::string class_id;
  std::uint64_t seed = 0;
  std::string config;
  double score = 0.0;
  std::string tier;
  std::string scenario;
  int instruction_variant = 0;
  int iterations_used = 0;
  std::vector<std::string> criticisms;
  Verdict verdict = Verdict::kRejected;
  std::string reject_reason;
  std::string reject_detail;

  nlohmann::json to_json() const;
  static TripletRecord from_json(const nlohmann::json& j);
};

// Never throws for per-instance failures: every stage failure becomes a
// rejected record with a stage-tagged reason.
TripletRecord synthesize(Gateway& gateway, const SourceInstance& source, const SynthesisOptions& options);

// Re-solves both sides of an accepted record and reports whether the
// acceptance decision reproduces.
bool reverify(const TripletRecord& record, double eps = 1e-6, const SolverConfig& solver = {});

struct SynthesisRun {
  std::vector<TripletRecord> accepted;
  std::vector<TripletRecord> rejected;
};

// Synthesizes every source (in parallel up to options.jobs) and returns the
// records in input order. When `out_dir` is given, writes accepted.jsonl and
// rejected.jsonl there.
SynthesisRun synthesize_all(Gateway& gateway, const std::vector<SourceInstance>& sources,
                            const SynthesisOptions& options,
                            const std::optional<std::filesystem::path>& out_dir = std::nullopt);

void write_records(const std::filesystem::path& path, const std::vector<TripletRecord>& records);
std::vector<TripletRecord> read_records(const std::filesystem::path& path);

// Stable 64-bit hash of a record id, for per-record random streams.
std::uint64_t id_hash(std::string_view id);

}  // namespace optsynth
