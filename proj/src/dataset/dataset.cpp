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

#include "optsynth/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "optsynth/errors.hpp"
#include "optsynth/kv_config.hpp"
#include "optsynth/llm.hpp"
#include "optsynth/lp_io.hpp"
#include "optsynth/model_json.hpp"
#include "optsynth/random.hpp"

namespace optsynth {

namespace {

std::string lp_text(const ProblemData& pd) {
  try {
    return emit_lp(pd);
  } catch (const UnsupportedConstructError&) {
    return {};
  }
}

std::size_t tier_rank(const std::string& name, const std::vector<DifficultyTier>& tiers) {
  for (std::size_t i = 0; i < tiers.size(); ++i) {
    if (tiers[i].name == name) return i;
  }
  return tiers.size();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw Error("cannot write " + path.string());
}

void add_table(std::ostringstream& out, const std::string& title, const std::map<std::string, std::size_t>& rows) {
  out << title << "\n";
  for (const auto& [key, count] : rows) out << "  " << (key.empty() ? "(unset)" : key) << "\t" << count << "\n";
}

void add_histogram(std::ostringstream& out, const std::string& title, const Histogram& h) {
  out << title << "\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out << "  [" << h.edges[i] << ", ";
    if (i + 1 < h.edges.size()) {
      out << h.edges[i + 1] << ")";
    } else {
      out << "inf)";
    }
    out << "\t" << h.counts[i] << "\n";
  }
}

}  // namespace

nlohmann::json CorpusRecord::to_json() const {
  nlohmann::json j = {{"id", id},
                      {"nl", nl},
                      {"mf", mf},
                      {"pd_lp", pd_lp},
                      {"pd_json", optsynth::to_json(pd)},
                      {"ov", ov}};
  if (ov_relaxed) j["ov_relaxed"] = *ov_relaxed;
  j["class_id"] = class_id;
  j["tier"] = tier;
  j["scenario"] = scenario;
  return j;
}

CorpusRecord CorpusRecord::from_json(const nlohmann::json& j) {
  CorpusRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.nl = j.at("nl").get<std::string>();
    r.mf = j.value("mf", "");
    r.pd_lp = j.value("pd_lp", "");
    r.pd = problem_from_json(j.at("pd_json"));
    r.ov = j.at("ov").get<double>();
    if (auto it = j.find("ov_relaxed"); it != j.end() && !it->is_null()) r.ov_relaxed = it->get<double>();
    r.class_id = j.value("class_id", "");
    r.tier = j.value("tier", "");
    r.scenario = j.value("scenario", "");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed corpus record: ") + e.what(), 0, 0);
  }
  return r;
}

Histogram::Histogram(std::vector<std::size_t> bin_edges) : edges(std::move(bin_edges)), counts(edges.size(), 0) {
  if (edges.empty() || edges.front() != 0 || !std::is_sorted(edges.begin(), edges.end()) ||
      std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw ConfigError("histogram edges must start at 0 and increase strictly");
  }
}

void Histogram::add(std::size_t value) {
  const auto it = std::upper_bound(edges.begin(), edges.end(), value);
  ++counts[static_cast<std::size_t>(it - edges.begin()) - 1];
}

std::size_t Histogram::total() const {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

nlohmann::json Histogram::to_json() const { return {{"edges", edges}, {"counts", counts}}; }

std::vector<std::size_t> default_length_edges() { return {0, 250, 500, 1000, 1500, 2000, 3000, 4000, 6000, 8000}; }

nlohmann::json CorpusStats::to_json() const {
  nlohmann::json j = {{"record_count", record_count},
                      {"nl_length", nl_length.to_json()},
                      {"lp_length", lp_length.to_json()},
                      {"per_tier", per_tier},
                      {"per_class", per_class},
                      {"per_scenario", per_scenario}};
  j["acceptance_rate"] = acceptance_rate ? nlohmann::json(*acceptance_rate) : nlohmann::json(nullptr);
  return j;
}

std::string CorpusStats::to_text() const {
  std::ostringstream out;
  out << "records\t" << record_count << "\n";
  if (acceptance_rate) out << "acceptance rate\t" << *acceptance_rate << "\n";
  add_histogram(out, "description length (characters)", nl_length);
  add_histogram(out, "LP length (characters)", lp_length);
  add_table(out, "tiers", per_tier);
  add_table(out, "classes", per_class);
  add_table(out, "scenarios", per_scenario);
  return out.str();
}

CorpusStats compute_stats(const std::vector<CorpusRecord>& records, std::optional<double> acceptance_rate) {
  CorpusStats s;
  s.record_count = records.size();
  s.acceptance_rate = acceptance_rate;
  for (const auto& r : records) {
    s.nl_length.add(lp_length(r.nl));
    s.lp_length.add(lp_length(r.pd_lp));
    ++s.per_tier[r.tier];
    ++s.per_class[r.class_id];
    ++s.per_scenario[r.scenario];
  }
  return s;
}

TrainBuild build_train(const std::vector<TripletRecord>& accepted, const std::vector<AugmentedCandidate>& augmented,
                       const TrainOptions& options, std::optional<std::size_t> rejected_count) {
  TrainBuild out;
  std::set<std::string> seen;
  auto keep = [&](CorpusRecord r) {
    if (!seen.insert(sha256_hex(r.nl)).second) {
      ++out.duplicates;
      return;
    }
    out.records.push_back(std::move(r));
  };

  for (const auto& t : accepted) {
    std::string problem;
    if (t.verdict != Verdict::kAccepted) problem = "not accepted";
    else if (!t.ov) problem = "no optimal value";
    else if (trim(t.nl).empty()) problem = "empty description";
    else if (const auto d = validate(t.source); !d.empty()) problem = d.front().location + ": " + d.front().message;
    if (!problem.empty()) {
      out.skipped.push_back(t.id + ": " + problem);
      continue;
    }
    keep({t.id, t.nl, t.mf, lp_text(t.source), t.source, *t.ov, std::nullopt, t.class_id, t.tier, t.scenario});
  }
  for (const auto& c : augmented) {
    if (!c.qualified) continue;
    if (!c.pd || !c.ov || trim(c.nl_aug).empty()) {
      out.skipped.push_back(c.id + ": qualified candidate without model or value");
      continue;
    }
    const std::string mf = c.samples.empty() ? std::string() : c.samples.front().mf;
    keep({c.id, c.nl_aug, mf, lp_text(*c.pd), *c.pd, *c.ov, std::nullopt, c.class_id,
          primary_tier(score(*c.pd).score, options.tiers), c.scenario});
  }

  Rng rng(options.seed);
  rng.shuffle(out.records);
  std::optional<double> rate;
  if (rejected_count) {
    const double total = static_cast<double>(accepted.size() + *rejected_count);
    if (total > 0) rate = static_cast<double>(accepted.size()) / total;
  }
  out.stats = compute_stats(out.records, rate);
  return out;
}

void write_corpus(const std::filesystem::path& dir, const std::vector<CorpusRecord>& records,
                  const CorpusStats& stats, const nlohmann::json& extra) {
  std::filesystem::create_directories(dir);
  std::ostringstream lines;
  for (const auto& r : records) lines << r.to_json().dump() << '\n';
  write_text(dir / "corpus.jsonl", lines.str());
  auto j = stats.to_json();
  for (const auto& [k, v] : extra.items()) j[k] = v;
  write_text(dir / "stats.json", j.dump(2) + "\n");
  write_text(dir / "stats.txt", stats.to_text());
}

std::vector<CorpusRecord> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<CorpusRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(CorpusRecord::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), n, 0);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), n, 0);
    }
  }
  return out;
}

std::string problem_type(const ProblemData& pd) {
  bool nonlinear_rows = false;
  for (const auto& c : pd.constraints) nonlinear_rows = nonlinear_rows || !c.body.is_linear();
  if (nonlinear_rows || pd.objective.has_transcendental() || pd.objective.degree() > 2) return "NLP";
  if (pd.objective.degree() == 2) return "QP";
  std::size_t integral = 0;
  for (const auto& v : pd.variables) integral += v.is_integral() ? 1 : 0;
  if (integral == 0) return "LP";
  return integral == pd.variables.size() ? "IP" : "MILP";
}

ProblemData relax_integrality(const ProblemData& pd) {
  ProblemData out = pd;
  for (auto& v : out.variables) {
    if (v.kind == VariableKind::kBinary) {
      v.lower = std::max(v.lower, 0.0);
      v.upper = std::min(v.upper, 1.0);
    }
    v.kind = VariableKind::kContinuous;
  }
  return out;
}

nlohmann::json BenchBuild::report() const {
  return {{"records", records.size()},
          {"type_counts", type_counts},
          {"missing_types", missing_types},
          {"dropped", dropped},
          {"warnings", warnings}};
}

BenchBuild build_bench(const std::vector<TripletRecord>& rejected, const BenchSelection& selection,
                       const SolverConfig& solver) {
  std::size_t floor_rank = 0;
  if (!selection.tier_floor.empty()) {
    floor_rank = tier_rank(selection.tier_floor, selection.tiers);
    if (floor_rank == selection.tiers.size()) throw ConfigError("unknown tier '" + selection.tier_floor + "'");
  }

  BenchBuild out;
  std::set<std::string> sources;
  std::map<std::string, std::size_t> per_class;
  for (const auto& t : rejected) {
    auto drop = [&](const char* reason) { ++out.dropped[reason]; };
    if (t.verdict != Verdict::kRejected) {
      drop("not-rejected");
    } else if (!selection.include.empty() && !selection.include.count(t.id)) {
      drop("not-included");
    } else if (selection.exclude.count(t.id)) {
      drop("excluded");
    } else if (!t.ov) {
      drop("no-ground-truth");
    } else if (trim(t.nl).empty() || lp_length(t.nl) < selection.min_nl_length) {
      drop("too-short");
    } else if (!selection.tier_floor.empty() && (tier_rank(t.tier, selection.tiers) < floor_rank ||
                                                   tier_rank(t.tier, selection.tiers) == selection.tiers.size())) {
      drop("below-tier-floor");
    } else if (!sources.insert(sha256_hex(to_json_text(t.source))).second) {
      drop("duplicate-source");
    } else if (selection.class_quota > 0 && per_class[t.class_id] >= selection.class_quota) {
      drop("class-quota");
    } else {
      ++per_class[t.class_id];
      CorpusRecord r{t.id, t.nl, t.mf, lp_text(t.source), t.source, *t.ov, std::nullopt, t.class_id, t.tier,
                     t.scenario};
      if (std::any_of(t.source.variables.begin(), t.source.variables.end(),
                      [](const Variable& v) { return v.is_integral(); })) {
        const auto relaxed = solve(relax_integrality(t.source), solver);
        if (relaxed.optimal()) r.ov_relaxed = relaxed.objective;
      }
      ++out.type_counts[problem_type(t.source)];
      out.records.push_back(std::move(r));
    }
  }
  for (const auto& type : selection.coverage) {
    if (!out.type_counts.count(type)) out.missing_types.push_back(type);
  }
  if (out.records.empty()) out.warnings.push_back("no record passed the selection");
  for (const auto& type : out.missing_types) out.warnings.push_back("no " + type + " instance selected");
  return out;
}

nlohmann::json GradeReport::to_json() const {
  return {{"total", total},   {"passed", passed},   {"accuracy", accuracy()},
          {"failed", failed}, {"missing", missing}, {"unknown", unknown}};
}

GradeReport grade(const std::vector<CorpusRecord>& bench, const std::map<std::string, double>& predictions,
                  double eps) {
  GradeReport g;
  std::set<std::string> ids;
  for (const auto& r : bench) {
    ids.insert(r.id);
    ++g.total;
    auto it = predictions.find(r.id);
    if (it == predictions.end()) {
      g.missing.push_back(r.id);
      continue;
    }
    const bool ok = values_match(it->second, r.ov, eps) || (r.ov_relaxed && values_match(it->second, *r.ov_relaxed, eps));
    if (ok) {
      ++g.passed;
    } else {
      g.failed.push_back(r.id);
    }
  }
  for (const auto& [id, value] : predictions) {
    if (!ids.count(id)) g.unknown.push_back(id);
  }
  return g;
}

std::map<std::string, double> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  std::map<std::string, double> out;
  try {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
      // A single object of id -> value, unless the file is JSONL.
      const auto doc = nlohmann::json::parse(text, nullptr, false);
      if (!doc.is_discarded() && !doc.contains("prediction")) {
        for (const auto& [id, v] : doc.items()) out[id] = v.get<double>();
        return out;
      }
    }
    std::istringstream lines(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(lines, line)) {
      ++n;
      if (trim(line).empty()) continue;
      const auto j = nlohmann::json::parse(line);
      const auto& value = j.at("prediction");
      if (!value.is_number()) throw ParseError("prediction for '" + j.at("id").get<std::string>() + "' is not a number", n, 0);
      out[j.at("id").get<std::string>()] = value.get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed predictions: ") + e.what(), 0, 0);
  }
  return out;
}

}  // namespace optsynth
