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

// Seeded, parameterized instance generators and their schemas.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "optsynth/model.hpp"
#include "optsynth/random.hpp"

namespace optsynth {

struct IntRange {
  std::int64_t low = 0;
  std::int64_t high = 0;
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

struct RealRange {
  double low = 0.0;
  double high = 0.0;
  friend bool operator==(const RealRange&, const RealRange&) = default;
};

using ParamValue = std::variant<std::int64_t, double, IntRange, RealRange, std::vector<double>>;

enum class ParamType { kInteger, kReal, kIntRange, kRealRange, kList };

std::string_view to_string(ParamType type);

struct ParamDecl {
  std::string name;
  ParamType type = ParamType::kInteger;
  // Every scalar, range endpoint and list element must lie in [min, max].
  double min = 0.0;
  double max = 0.0;
  ParamValue default_value;
  std::string description;
};

struct GeneratorMetadata {
  std::string subclass;
  std::string formulation;
  std::string reference;
};

struct GeneratorSchema {
  std::string class_id;
  std::vector<ParamDecl> parameters;
  GeneratorMetadata metadata;
  // Integer-range parameter that drives instance size; the tuner's
  // rule-based advisor searches over it.
  std::string size_parameter;

  const ParamDecl* find(std::string_view name) const;
  nlohmann::json to_json() const;
};

using ParamMap = std::map<std::string, ParamValue>;

struct GeneratorConfig {
  std::string class_id;
  ParamMap parameters;  // missing names take schema defaults
  std::uint64_t seed = 0;
};

nlohmann::json param_to_json(const ParamValue& v);
// Throws ConfigError when `j` does not fit the declared type.
ParamValue param_from_json(const ParamDecl& decl, const nlohmann::json& j);
nlohmann::json params_to_json(const ParamMap& params);
// Unknown keys and ill-typed values throw ConfigError.
ParamMap params_from_json(const GeneratorSchema& schema, const nlohmann::json& j);
std::string param_to_string(const ParamValue& v);

// Throws ConfigError naming the parameter on any schema violation.
void check_config(const GeneratorSchema& schema, const GeneratorConfig& cfg);
// Schema defaults overlaid with cfg.parameters, after check_config.
ParamMap resolve_parameters(const GeneratorSchema& schema, const GeneratorConfig& cfg);

// Random draws from resolved parameters. Ranges draw uniformly with both
// endpoints included; scalars return their value.
class ParamDraws {
 public:
  ParamDraws(const ParamMap& params, Rng& rng) : params_(params), rng_(rng) {}

  std::int64_t integer(const std::string& name);
  double real(const std::string& name);
  const std::vector<double>& list(const std::string& name) const;
  // integer() whose result is kept in the instance metadata.
  std::int64_t recorded_integer(const std::string& name);
  Rng& rng() { return rng_; }
  const std::map<std::string, std::string>& recorded() const { return recorded_; }

 private:
  const ParamValue& get(const std::string& name) const;

  const ParamMap& params_;
  Rng& rng_;
  std::map<std::string, std::string> recorded_;
};

// A builder returns nullopt for a degenerate draw; generate() retries it.
using BuildFn = std::function<std::optional<ProblemData>(ParamDraws&)>;

struct GeneratorClass {
  GeneratorSchema schema;
  BuildFn build;
};

inline constexpr int kMaxGenerationAttempts = 20;

const std::vector<GeneratorClass>& registry();
std::vector<GeneratorSchema> list_classes();
// Throws ConfigError for an unknown id.
const GeneratorClass& find_class(std::string_view class_id);

// Deterministic in (class_id, parameters, seed). Degenerate draws retry
// with seed + 1, seed + 2, ... up to kMaxGenerationAttempts; then throws
// GenerationError.
ProblemData generate(const GeneratorConfig& cfg);

struct BatchItem {
  std::uint64_t seed = 0;
  std::optional<ProblemData> problem;
  std::string error;
};

// Item i uses sub_seed(cfg.seed, i). Output order and content do not depend
// on `jobs`.
std::vector<BatchItem> generate_batch(const GeneratorConfig& cfg, std::size_t n, std::size_t jobs = 1);

// Writes <dir>/<class_id>/metadata.json for every registered class.
void export_catalog(const std::filesystem::path& dir);

// Direct builders from explicit data, shared with tests.
ProblemData build_knapsack(const std::vector<double>& values, const std::vector<double>& weights,
                           double capacity);
ProblemData build_bin_packing(const std::vector<double>& weights, double capacity);
ProblemData build_assignment(const std::vector<std::vector<double>>& cost);
// sets[s] lists the elements covered by set s.
ProblemData build_set_cover(std::size_t n_elements, const std::vector<std::vector<std::size_t>>& sets,
                            const std::vector<double>& costs);

}  // namespace optsynth
