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

// Training and benchmark corpus assembly, statistics and grading.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "optsynth/augment.hpp"
#include "optsynth/complexity.hpp"
#include "optsynth/model.hpp"
#include "optsynth/synthesis.hpp"

namespace optsynth {

struct CorpusRecord {
  std::string id;
  std::string nl;
  std::string mf;
  std::string pd_lp;  // empty when the model has no LP form
  ProblemData pd;
  double ov = 0.0;
  std::optional<double> ov_relaxed;
  std::string class_id;
  std::string tier;
  std::string scenario;

  nlohmann::json to_json() const;
  static CorpusRecord from_json(const nlohmann::json& j);
};

// Bins are [edges[i], edges[i+1]) with a final open bin [edges.back(), inf).
struct Histogram {
  std::vector<std::size_t> edges;
  std::vector<std::size_t> counts;

  explicit Histogram(std::vector<std::size_t> bin_edges);
  void add(std::size_t value);
  std::size_t total() const;
  nlohmann::json to_json() const;
};

std::vector<std::size_t> default_length_edges();

struct CorpusStats {
  std::size_t record_count = 0;
  Histogram nl_length{default_length_edges()};
  Histogram lp_length{default_length_edges()};
  std::map<std::string, std::size_t> per_tier;
  std::map<std::string, std::size_t> per_class;
  std::map<std::string, std::size_t> per_scenario;
  std::optional<double> acceptance_rate;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

// Lengths count Unicode code points.
CorpusStats compute_stats(const std::vector<CorpusRecord>& records,
                          std::optional<double> acceptance_rate = std::nullopt);

struct TrainOptions {
  std::uint64_t seed = 0;  // shuffle seed, recorded in stats.json
  std::vector<DifficultyTier> tiers = default_tiers();
};

struct TrainBuild {
  std::vector<CorpusRecord> records;
  CorpusStats stats;
  std::size_t duplicates = 0;
  std::vector<std::string> skipped;  // "<id>: <reason>"
};

// rejected_count only feeds the acceptance rate in the statistics.
TrainBuild build_train(const std::vector<TripletRecord>& accepted, const std::vector<AugmentedCandidate>& augmented,
                       const TrainOptions& options = {}, std::optional<std::size_t> rejected_count = std::nullopt);

// Writes corpus.jsonl, stats.json and stats.txt into dir.
void write_corpus(const std::filesystem::path& dir, const std::vector<CorpusRecord>& records,
                  const CorpusStats& stats, const nlohmann::json& extra = nlohmann::json::object());
std::vector<CorpusRecord> read_corpus(const std::filesystem::path& path);

// LP, IP, MILP, QP or NLP. Quadratic objectives with linear constraints are QP;
// any other nonlinearity is NLP.
std::string problem_type(const ProblemData& pd);

// Integer and binary variables become continuous; binaries keep [0, 1].
ProblemData relax_integrality(const ProblemData& pd);

struct BenchSelection {
  std::size_t min_nl_length = 0;
  std::string tier_floor;        // empty for no floor; "none" records never pass a floor
  std::size_t class_quota = 0;   // 0 for no quota
  std::set<std::string> coverage = {"LP", "IP", "MILP", "NLP", "SOCP"};
  std::set<std::string> include;  // when non-empty, only these ids are eligible
  std::set<std::string> exclude;
  std::vector<DifficultyTier> tiers = default_tiers();
};

struct BenchBuild {
  std::vector<CorpusRecord> records;
  std::map<std::string, std::size_t> type_counts;
  std::vector<std::string> missing_types;
  std::map<std::string, std::size_t> dropped;  // reason -> count
  std::vector<std::string> warnings;

  nlohmann::json report() const;
};

BenchBuild build_bench(const std::vector<TripletRecord>& rejected, const BenchSelection& selection,
                       const SolverConfig& solver = {});

struct GradeReport {
  std::size_t total = 0;
  std::size_t passed = 0;
  std::vector<std::string> failed;   // wrong value
  std::vector<std::string> missing;  // no prediction
  std::vector<std::string> unknown;  // predictions for ids not in the bench

  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(passed) / static_cast<double>(total); }
  nlohmann::json to_json() const;
};

// A prediction passes when it matches ov, or ov_relaxed when stored.
GradeReport grade(const std::vector<CorpusRecord>& bench, const std::map<std::string, double>& predictions,
                  double eps = 1e-6);

// JSONL lines {"id": ..., "prediction": number} or one JSON object id -> number.
std::map<std::string, double> read_predictions(const std::filesystem::path& path);

}  // namespace optsynth
