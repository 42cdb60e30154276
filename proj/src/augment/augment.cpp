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

#include "optsynth/augment.hpp"

#include <atomic>
#include <fstream>
#include <thread>

#include "optsynth/errors.hpp"
#include "optsynth/kv_config.hpp"
#include "optsynth/model_json.hpp"
#include "optsynth/random.hpp"

namespace optsynth {

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> read_optional_number(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

SampleOutcome run_sample(Gateway& gateway, const std::string& nl, int sample, int variant,
                         const AugmentOptions& options) {
  SampleOutcome out;
  out.sample = sample;
  out.instruction_variant = variant;
  try {
    auto fm = autoformulate(gateway, nl, variant, sample);
    const auto solved = solve(fm.pd_prime, options.solver);
    out.mf = std::move(fm.mf);
    out.pd = std::move(fm.pd_prime);
    out.status = solved.status;
    out.ov = solved.optimal() ? solved.objective : std::nullopt;
    if (auto it = solved.info.find("error"); it != solved.info.end()) out.error = it->second;
  } catch (const StageError& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

const std::vector<AugmentationRule>& augmentation_rules() {
  static const std::vector<AugmentationRule> rules = {
      {"semantic_rephrase", "semantic",
       "Rephrase the problem description while maintaining the same mathematical structure..."},
      {"semantic_terminology", "semantic", "Rewrite the problem using different expressions and terminology..."},
      {"scenario_transform", "scenario",
       "Transform the problem into a different application scenario while preserving the same structure..."},
      {"scenario_variant", "scenario", "Conceive a variant on another scenario for the mathematical model..."},
      {"numerical_change", "numerical",
       "Change the numerical parameters while maintaining the same problem structure..."},
      {"numerical_scale", "numerical", "Scale up or down the problem size by adjusting parameters proportionally..."},
      {"variant_constraints", "variant", "Generate a variant by adding/removing/modifying constraints..."},
      {"variant_combine", "variant", "Create a variation by combining different types of constraints..."},
      {"more_variables", "complication",
       "Increase the number of decision variables while maintaining similar structure..."},
      {"variable_bounds", "complication", "Add bounds for adjustment variables..."},
      {"realistic_constraints", "complication",
       "Add realistic constraints like capacity limitations, budget restrictions..."},
      {"cross_constraints", "complication", "Introduce cross-variable constraints between components..."},
      {"tabular_data", "complication", "Convert parameters into tabular form with more complex data structures..."},
      {"nonlinear", "complication", "Generate non-linear problems by replacing linear relations..."},
      {"hybrid", "complication", "Combine with other problem types to generate hybrid problems..."},
      {"multi_objective", "multi-objective",
       "Add new objective functions to generate multi-objective problems..."},
      {"objective_terms", "multi-objective", "Modify objective function to include additional terms..."},
      {"symmetry", "symmetry", "Generate variants by introducing symmetries..."},
      {"dual", "symmetry", "Generate dual problems while modifying parameters and constraints..."},
  };
  return rules;
}

const AugmentationRule& find_rule(std::string_view id) {
  for (const auto& r : augmentation_rules()) {
    if (r.id == id) return r;
  }
  throw ConfigError("unknown augmentation rule '" + std::string(id) + "'");
}

nlohmann::json SampleOutcome::to_json() const {
  return {{"sample", sample},
          {"instruction_variant", instruction_variant},
          {"mf", mf},
          {"pd", pd ? optsynth::to_json(*pd) : nlohmann::json(nullptr)},
          {"status", std::string(optsynth::to_string(status))},
          {"ov", optional_number(ov)},
          {"error", error}};
}

SampleOutcome SampleOutcome::from_json(const nlohmann::json& j) {
  SampleOutcome s;
  s.sample = j.at("sample").get<int>();
  s.instruction_variant = j.value("instruction_variant", 0);
  s.mf = j.value("mf", "");
  if (auto it = j.find("pd"); it != j.end() && !it->is_null()) s.pd = problem_from_json(*it);
  const auto status = parse_solve_status(j.at("status").get<std::string>());
  if (!status) throw ParseError("bad sample status", 0, 0);
  s.status = *status;
  s.ov = read_optional_number(j, "ov");
  s.error = j.value("error", "");
  return s;
}

nlohmann::json AugmentedCandidate::to_json() const {
  nlohmann::json samples_json = nlohmann::json::array();
  for (const auto& s : samples) samples_json.push_back(s.to_json());
  return {{"schema", kAugmentedSchema},
          {"id", id},
          {"source_id", source_id},
          {"rule_id", rule_id},
          {"attempt", attempt},
          {"qualified", qualified},
          {"reason", reason},
          {"nl", nl_aug},
          {"samples", samples_json},
          {"pd", pd ? optsynth::to_json(*pd) : nlohmann::json(nullptr)},
          {"ov", optional_number(ov)},
          {"class_id", class_id},
          {"tier", tier},
          {"scenario", scenario}};
}

AugmentedCandidate AugmentedCandidate::from_json(const nlohmann::json& j) {
  AugmentedCandidate c;
  try {
    if (j.value("schema", "") != kAugmentedSchema) throw ParseError("unsupported candidate schema", 0, 0);
    c.id = j.at("id").get<std::string>();
    c.source_id = j.at("source_id").get<std::string>();
    c.rule_id = j.at("rule_id").get<std::string>();
    c.attempt = j.value("attempt", 0);
    c.qualified = j.at("qualified").get<bool>();
    c.reason = j.value("reason", "");
    c.nl_aug = j.at("nl").get<std::string>();
    for (const auto& s : j.value("samples", nlohmann::json::array())) c.samples.push_back(SampleOutcome::from_json(s));
    if (auto it = j.find("pd"); it != j.end() && !it->is_null()) c.pd = problem_from_json(*it);
    c.ov = read_optional_number(j, "ov");
    c.class_id = j.value("class_id", "");
    c.tier = j.value("tier", "");
    c.scenario = j.value("scenario", "");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed candidate: ") + e.what(), 0, 0);
  }
  if (c.qualified && (!c.pd || !c.ov)) throw ParseError("qualified candidate '" + c.id + "' lacks pd or ov", 0, 0);
  return c;
}

std::string qualification_reason(const SampleOutcome& first, const SampleOutcome& second, double eps) {
  if (!first.optimal() && !second.optimal()) return "both-samples-failed";
  if (!first.optimal()) return "first-sample-failed";
  if (!second.optimal()) return "second-sample-failed";
  if (!values_match(*second.ov, *first.ov, eps)) return "samples-disagree";
  return {};
}

AugmentedCandidate augment_one(Gateway& gateway, const TripletRecord& record, const AugmentationRule& rule,
                               int attempt, const AugmentOptions& options) {
  if (record.verdict != Verdict::kAccepted) throw ConfigError("record '" + record.id + "' is not accepted");
  AugmentedCandidate c;
  c.id = record.id + "/aug" + std::to_string(attempt);
  c.source_id = record.id;
  c.rule_id = rule.id;
  c.attempt = attempt;
  c.class_id = record.class_id;
  c.tier = record.tier;
  c.scenario = record.scenario;

  try {
    c.nl_aug = trim(gateway.ask(PromptId::kAugmentation, {{"original_problem", record.nl}, {"rule", rule.instruction}},
                                attempt)
                        .response);
  } catch (const GatewayError& e) {
    c.reason = "augmentation-error";
    return c;
  }
  if (c.nl_aug.empty()) {
    c.reason = "augmentation-empty";
    return c;
  }

  Rng rng(sub_seed(sub_seed(options.seed, id_hash(c.id)), 1));
  const auto variants = autoformulation_instructions().size();
  for (int sample = 0; sample < 2; ++sample) {
    const int variant = static_cast<int>(rng.index(variants));
    try {
      c.samples.push_back(run_sample(gateway, c.nl_aug, sample, variant, options));
    } catch (const std::exception& e) {
      SampleOutcome failed;
      failed.sample = sample;
      failed.instruction_variant = variant;
      failed.error = e.what();
      c.samples.push_back(std::move(failed));
    }
  }
  c.reason = qualification_reason(c.samples[0], c.samples[1], options.eps);
  c.qualified = c.reason.empty();
  if (c.qualified) {
    c.pd = c.samples[0].pd;
    c.ov = c.samples[0].ov;
  }
  return c;
}

AugmentRun augment_corpus(Gateway& gateway, const std::vector<TripletRecord>& records,
                          const std::vector<AugmentationRule>& rules, int target_per_record,
                          const AugmentOptions& options) {
  if (target_per_record < 1) throw ConfigError("target per record must be at least 1");
  if (rules.empty()) throw ConfigError("augmentation needs at least one rule");
  if (options.attempt_cap_factor < 1) throw ConfigError("attempt cap factor must be at least 1");
  const int cap = target_per_record * options.attempt_cap_factor;

  std::vector<std::vector<AugmentedCandidate>> per_record(records.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      try {
        const auto& record = records[i];
        Rng rng(sub_seed(options.seed, id_hash(record.id)));
        int qualified = 0;
        for (int attempt = 0; attempt < cap && qualified < target_per_record; ++attempt) {
          const auto& rule = rules[rng.index(rules.size())];
          per_record[i].push_back(augment_one(gateway, record, rule, attempt, options));
          qualified += per_record[i].back().qualified ? 1 : 0;
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::min(std::max<std::size_t>(1, options.jobs), std::max<std::size_t>(1, records.size()));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  AugmentRun run;
  for (std::size_t i = 0; i < records.size(); ++i) {
    int qualified = 0;
    for (auto& c : per_record[i]) {
      qualified += c.qualified ? 1 : 0;
      run.candidates.push_back(std::move(c));
    }
    run.qualified[records[i].id] = qualified;
    if (qualified < target_per_record) run.shortfall[records[i].id] = target_per_record - qualified;
  }
  return run;
}

void write_candidates(const std::filesystem::path& path, const std::vector<AugmentedCandidate>& candidates) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& c : candidates) out << c.to_json().dump() << '\n';
  if (!out) throw Error("cannot write " + path.string());
}

std::vector<AugmentedCandidate> read_candidates(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<AugmentedCandidate> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(AugmentedCandidate::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), n, 0);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), n, 0);
    }
  }
  return out;
}

}  // namespace optsynth
