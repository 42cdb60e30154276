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
#include <fstream>
#include <thread>

#include "optsynth/errors.hpp"
#include "optsynth/generators.hpp"
#include "optsynth/kv_config.hpp"
#include "optsynth/lp_io.hpp"
#include "optsynth/model_json.hpp"
#include "optsynth/synthesis.hpp"

namespace optsynth {

namespace {

std::string lp_or_math(const ProblemData& pd) {
  try {
    return emit_lp(pd);
  } catch (const UnsupportedConstructError&) {
    return render_math(pd);
  }
}

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> read_optional_number(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

VerifyResult decide(SolveOutcome source, SolveOutcome prime, double eps) {
  VerifyResult r;
  r.source = std::move(source);
  r.prime = std::move(prime);
  if (r.source.status == SolveStatus::kError || r.prime.status == SolveStatus::kError) {
    r.reason = "solver-error";
  } else if (!r.source.optimal()) {
    r.reason = "source-not-optimal";
  } else if (!r.prime.optimal()) {
    r.reason = "formulation-not-optimal";
  } else if (!values_match(*r.prime.objective, *r.source.objective, eps)) {
    r.reason = "value-mismatch";
  } else {
    r.verdict = Verdict::kAccepted;
  }
  return r;
}

const char* kFormulationFormat =
    "The mathematical formulation, then a ```json block holding {\"model\": {...}} with the keys name, sense, "
    "objective, variables and constraints as described in the notes.";

}  // namespace

const std::vector<std::string>& default_scenarios() {
  static const std::vector<std::string> s = {"logistics",  "supply chain",       "manufacturing", "transportation",
                                             "energy",     "finance",            "healthcare",    "telecommunications",
                                             "agriculture", "retail"};
  return s;
}

bool criticism_is_complete(const std::string& criticism) {
  std::string t = trim(criticism);
  while (!t.empty() && (t.front() == '"' || t.front() == '\'')) t.erase(0, 1);
  return t.rfind("Complete Instance", 0) == 0;
}

BacktranslationResult backtranslate(Gateway& gateway, const std::string& mf, const ProblemData& pd, int rounds,
                                    Rng& rng, const std::vector<std::string>& scenarios,
                                    const std::string& examples) {
  if (rounds < 0) throw ConfigError("refinement rounds must be non-negative");
  BacktranslationResult out;
  const std::string lp = lp_or_math(pd);
  if (!scenarios.empty()) out.scenario_tag = scenarios[rng.index(scenarios.size())];

  auto ask = [&](PromptId id, const Bindings& b) {
    try {
      return gateway.ask(id, b).response;
    } catch (const GatewayError& e) {
      throw StageError(std::string(to_string(id)), e.what());
    }
  };

  out.nl = trim(ask(PromptId::kInitialGeneration, {{"mathematical_expression", mf},
                                                   {"lp_data", lp},
                                                   {"scenario", out.scenario_tag},
                                                   {"examples", examples}}));
  for (int round = 1; round <= rounds; ++round) {
    const auto criticism = ask(PromptId::kSelfCriticism, {{"lp_data", lp}, {"problem_description", out.nl}});
    out.criticisms.push_back(criticism);
    out.iterations_used = round;
    if (criticism_is_complete(criticism)) break;
    const auto refined = ask(PromptId::kSelfRefinement, {{"criticism", criticism},
                                                         {"mathematical_expression", mf},
                                                         {"lp_data", lp},
                                                         {"initial_description", out.nl}});
    out.refinements.push_back(refined);
    if (refined.find("Nothing need to refine") != std::string::npos) break;
    out.nl = trim(refined);
  }
  return out;
}

ForwardModelResult parse_formulation_reply(const std::string& reply) {
  std::string doc_text, mf;
  const auto fence = reply.find("```json");
  if (fence != std::string::npos) {
    const auto start = reply.find('\n', fence);
    const auto stop = start == std::string::npos ? std::string::npos : reply.find("```", start);
    if (stop == std::string::npos) throw ParseError("unterminated ```json block", 0, 0);
    doc_text = reply.substr(start + 1, stop - start - 1);
    mf = reply.substr(0, fence);
  } else {
    const auto open = reply.find('{');
    const auto close = reply.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open) {
      throw ParseError("reply contains no model document", 0, 0);
    }
    doc_text = reply.substr(open, close - open + 1);
    mf = reply.substr(0, open);
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(doc_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model document is not valid JSON: ") + e.what(), 0, 0);
  }
  if (doc.is_object() && doc.size() == 1 && doc.contains("model") && doc["model"].is_object()) {
    doc = nlohmann::json(doc["model"]);
  }
  ForwardModelResult r;
  r.pd_prime = normalize(problem_from_json(doc));
  const auto diags = validate(r.pd_prime);
  if (!diags.empty()) throw ValidationError(diags.front().location + ": " + diags.front().message);
  r.mf = trim(mf);
  r.raw_response = reply;
  return r;
}

ForwardModelResult autoformulate(Gateway& gateway, const std::string& nl, int variant, int sample) {
  if (trim(nl).empty()) throw StageError("autoformulation", "empty problem description");
  const auto& instructions = autoformulation_instructions();
  const auto index = static_cast<std::size_t>(variant) % instructions.size();
  ChatExchange first;
  try {
    first = gateway.ask(PromptId::kAutoformulation, {{"instruction", instructions[index]}, {"question", nl}}, sample);
  } catch (const GatewayError& e) {
    throw StageError("autoformulation", e.what());
  }
  try {
    auto r = parse_formulation_reply(first.response);
    r.instruction_variant = static_cast<int>(index);
    return r;
  } catch (const Error& e) {
    ChatExchange repair;
    try {
      repair = gateway.ask(PromptId::kFormatRepair, {{"error", e.what()},
                                                     {"previous_response", first.response},
                                                     {"expected_format", kFormulationFormat}},
                           sample);
    } catch (const GatewayError& ge) {
      throw StageError("autoformulation", ge.what());
    }
    try {
      auto r = parse_formulation_reply(repair.response);
      r.instruction_variant = static_cast<int>(index);
      r.repaired = true;
      return r;
    } catch (const Error& again) {
      throw StageError("formulation-parse", again.what());
    }
  }
}

std::string_view to_string(Verdict v) { return v == Verdict::kAccepted ? "accepted" : "rejected"; }

VerifyResult verify(const ProblemData& pd, const ProblemData& pd_prime, double eps, const SolverConfig& solver) {
  return decide(solve(pd, solver), solve(pd_prime, solver), eps);
}

std::string primary_tier(double score, const std::vector<DifficultyTier>& tiers) {
  const DifficultyTier* best = nullptr;
  double best_distance = 0.0;
  for (const auto& t : tiers) {
    if (!t.contains(score)) continue;
    const double d = std::abs(score - 0.5 * (t.low + t.high));
    if (best == nullptr || d < best_distance) {
      best = &t;
      best_distance = d;
    }
  }
  return best == nullptr ? "none" : best->name;
}

SourceInstance make_source(const ProblemData& pd, const std::vector<DifficultyTier>& tiers) {
  SourceInstance s;
  s.pd = pd;
  s.id = pd.name.empty() ? "instance_" + sha256_hex(to_json_text(pd)).substr(0, 16) : pd.name;
  auto meta = [&](const char* key) {
    auto it = pd.metadata.find(key);
    return it == pd.metadata.end() ? std::string() : it->second;
  };
  s.class_id = meta("class_id");
  if (const auto seed = meta("seed"); !seed.empty()) s.seed = std::stoull(seed);
  s.config = meta("parameters");
  for (const auto& c : registry()) {
    if (c.schema.class_id == s.class_id) s.mf = c.schema.metadata.formulation;
  }
  s.score = score(pd).score;
  s.tier = primary_tier(s.score, tiers);
  return s;
}

std::uint64_t id_hash(std::string_view id) {
  const auto hex = sha256_hex(id);
  return std::stoull(hex.substr(0, 16), nullptr, 16);
}

nlohmann::json TripletRecord::to_json() const {
  nlohmann::json j = {{"schema", kTripletSchema},
                      {"id", id},
                      {"verdict", std::string(optsynth::to_string(verdict))},
                      {"reject_reason", reject_reason},
                      {"reject_detail", reject_detail},
                      {"nl", nl},
                      {"mf", mf},
                      {"mf_prime", mf_prime},
                      {"pd_prime", pd_prime ? optsynth::to_json(*pd_prime) : nlohmann::json(nullptr)},
                      {"pd_prime_lp", pd_prime_lp},
                      {"source", optsynth::to_json(source)},
                      {"ov", optional_number(ov)},
                      {"ov_prime", optional_number(ov_prime)},
                      {"class_id", class_id},
                      {"seed", seed},
                      {"config", config},
                      {"score", score},
                      {"tier", tier},
                      {"scenario", scenario},
                      {"instruction_variant", instruction_variant},
                      {"iterations_used", iterations_used},
                      {"criticisms", criticisms}};
  return j;
}

TripletRecord TripletRecord::from_json(const nlohmann::json& j) {
  TripletRecord r;
  try {
    if (j.value("schema", "") != kTripletSchema) throw ParseError("unsupported record schema", 0, 0);
    r.id = j.at("id").get<std::string>();
    const auto verdict = j.at("verdict").get<std::string>();
    if (verdict != "accepted" && verdict != "rejected") throw ParseError("bad verdict '" + verdict + "'", 0, 0);
    r.verdict = verdict == "accepted" ? Verdict::kAccepted : Verdict::kRejected;
    r.reject_reason = j.value("reject_reason", "");
    r.reject_detail = j.value("reject_detail", "");
    r.nl = j.at("nl").get<std::string>();
    r.mf = j.value("mf", "");
    r.mf_prime = j.value("mf_prime", "");
    if (auto it = j.find("pd_prime"); it != j.end() && !it->is_null()) r.pd_prime = problem_from_json(*it);
    r.pd_prime_lp = j.value("pd_prime_lp", "");
    r.source = problem_from_json(j.at("source"));
    r.ov = read_optional_number(j, "ov");
    r.ov_prime = read_optional_number(j, "ov_prime");
    r.class_id = j.value("class_id", "");
    r.seed = j.value("seed", std::uint64_t{0});
    r.config = j.value("config", "");
    r.score = j.value("score", 0.0);
    r.tier = j.value("tier", "");
    r.scenario = j.value("scenario", "");
    r.instruction_variant = j.value("instruction_variant", 0);
    r.iterations_used = j.value("iterations_used", 0);
    r.criticisms = j.value("criticisms", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed record: ") + e.what(), 0, 0);
  }
  if (r.verdict == Verdict::kAccepted && (!r.pd_prime || !r.ov)) {
    throw ParseError("accepted record '" + r.id + "' lacks pd_prime or ov", 0, 0);
  }
  return r;
}

TripletRecord synthesize(Gateway& gateway, const SourceInstance& source, const SynthesisOptions& options) {
  TripletRecord rec;
  rec.id = source.id;
  rec.mf = source.mf;
  rec.source = source.pd;
  rec.class_id = source.class_id;
  rec.seed = source.seed;
  rec.config = source.config;
  rec.score = source.score;
  rec.tier = source.tier;
  auto reject = [&](std::string reason, std::string detail) {
    rec.verdict = Verdict::kRejected;
    rec.reject_reason = std::move(reason);
    rec.reject_detail = std::move(detail);
    return rec;
  };

  try {
    Rng rng(sub_seed(options.seed, id_hash(source.id)));
    const auto source_outcome = solve(source.pd, options.solver);
    if (source_outcome.optimal()) rec.ov = source_outcome.objective;

    BacktranslationResult bt;
    try {
      bt = backtranslate(gateway, source.mf, source.pd, options.refine_rounds, rng, options.scenarios,
                         options.examples);
    } catch (const StageError& e) {
      return reject("backtranslation-error", e.what());
    }
    rec.nl = bt.nl;
    rec.scenario = bt.scenario_tag;
    rec.iterations_used = bt.iterations_used;
    rec.criticisms = bt.criticisms;
    if (rec.nl.empty()) return reject("backtranslation-empty", "");

    rec.instruction_variant = static_cast<int>(rng.index(autoformulation_instructions().size()));
    ForwardModelResult fm;
    try {
      fm = autoformulate(gateway, rec.nl, rec.instruction_variant);
    } catch (const StageError& e) {
      return reject(e.stage() == "formulation-parse" ? "formulation-parse" : "autoformulation-error", e.what());
    }
    rec.mf_prime = fm.mf;
    rec.pd_prime = fm.pd_prime;
    rec.pd_prime_lp = lp_or_math(fm.pd_prime);

    auto v = decide(source_outcome, solve(fm.pd_prime, options.solver), options.eps);
    if (v.prime.optimal()) rec.ov_prime = v.prime.objective;
    if (v.verdict == Verdict::kRejected) {
      std::string detail;
      if (auto it = v.source.info.find("error"); it != v.source.info.end()) detail = it->second;
      if (auto it = v.prime.info.find("error"); it != v.prime.info.end()) detail = it->second;
      return reject(v.reason, detail);
    }
    rec.verdict = Verdict::kAccepted;
    return rec;
  } catch (const std::exception& e) {
    return reject("internal-error", e.what());
  }
}

bool reverify(const TripletRecord& record, double eps, const SolverConfig& solver) {
  if (!record.pd_prime) return false;
  return verify(record.source, *record.pd_prime, eps, solver).verdict == Verdict::kAccepted;
}

void write_records(const std::filesystem::path& path, const std::vector<TripletRecord>& records) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : records) out << r.to_json().dump() << '\n';
  if (!out) throw Error("cannot write " + path.string());
}

std::vector<TripletRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<TripletRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(TripletRecord::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), n, 0);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), n, 0);
    }
  }
  return out;
}

SynthesisRun synthesize_all(Gateway& gateway, const std::vector<SourceInstance>& sources,
                            const SynthesisOptions& options, const std::optional<std::filesystem::path>& out_dir) {
  std::vector<TripletRecord> records(sources.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < sources.size(); i = next++) records[i] = synthesize(gateway, sources[i], options);
  };
  const std::size_t jobs = std::min(std::max<std::size_t>(1, options.jobs), std::max<std::size_t>(1, sources.size()));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  SynthesisRun run;
  for (auto& r : records) (r.verdict == Verdict::kAccepted ? run.accepted : run.rejected).push_back(std::move(r));
  if (out_dir) {
    write_records(*out_dir / "accepted.jsonl", run.accepted);
    write_records(*out_dir / "rejected.jsonl", run.rejected);
  }
  return run;
}

}  // namespace optsynth
