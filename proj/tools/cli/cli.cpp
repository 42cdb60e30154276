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

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "optsynth/augment.hpp"
#include "optsynth/complexity.hpp"
#include "optsynth/dataset.hpp"
#include "optsynth/errors.hpp"
#include "optsynth/generators.hpp"
#include "optsynth/kv_config.hpp"
#include "optsynth/llm.hpp"
#include "optsynth/lp_io.hpp"
#include "optsynth/model_json.hpp"
#include "optsynth/solver.hpp"
#include "optsynth/synthesis.hpp"
#include "optsynth/tuner.hpp"

namespace optsynth::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Lookup order: flags, environment, config file.
class Settings {
 public:
  explicit Settings(const EnvLookup& env) : env_(env) {}

  std::map<std::string, std::string> flags;
  KeyValues file;

  std::optional<std::string> find(const std::string& key) const {
    if (auto it = flags.find(key); it != flags.end()) return it->second;
    if (auto v = env_(env_name(key))) return v;
    if (auto it = file.find(key); it != file.end()) return it->second;
    return std::nullopt;
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    return find(key).value_or(fallback);
  }

  double number(const std::string& key, double fallback) const {
    const auto v = find(key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      const double d = std::stod(*v, &used);
      if (used == v->size()) return d;
    } catch (const std::exception&) {
    }
    throw ConfigError("setting '" + key + "' expects a number, got '" + *v + "'");
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    const double d = number(key, static_cast<double>(fallback));
    if (d != static_cast<double>(static_cast<std::int64_t>(d))) {
      throw ConfigError("setting '" + key + "' expects an integer");
    }
    return static_cast<std::int64_t>(d);
  }

  std::uint64_t seed() const {
    const auto v = find("seed");
    if (!v) return 0;
    try {
      std::size_t used = 0;
      const auto s = std::stoull(*v, &used);
      if (used == v->size()) return s;
    } catch (const std::exception&) {
    }
    throw ConfigError("setting 'seed' expects a non-negative integer, got '" + *v + "'");
  }

  std::size_t jobs() const {
    const auto j = integer("jobs", 1);
    if (j < 1) throw ConfigError("setting 'jobs' must be at least 1");
    return static_cast<std::size_t>(j);
  }

  void load_config() {
    auto path = flags.count("config") ? std::optional(flags.at("config")) : env_(env_name("config"));
    if (path) file = read_key_values(*path);
    for (const auto* source : {&flags, &file}) {
      for (const auto& [key, value] : *source) {
        if (key.find("api_key") != std::string::npos && key != "api_key_env") {
          throw ConfigError("API keys are read from the environment only; set the variable named by api_key_env");
        }
      }
    }
  }

 private:
  const EnvLookup& env_;
};

void setting(CLI::App* app, Settings& s, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(flag, [&s, key](const std::string& v) { s.flags[key] = v; }, help);
}

void common_options(CLI::App* app, Settings& s) {
  setting(app, s, "--config", "config", "key = value settings file");
  setting(app, s, "--seed", "seed", "master seed");
  setting(app, s, "--jobs", "jobs", "worker threads");
}

void solver_options(CLI::App* app, Settings& s) {
  setting(app, s, "--solver", "solver", "auto, builtin or external");
  setting(app, s, "--solver-command", "solver.command", "external solver argv template, or 'highs'");
  setting(app, s, "--time-limit", "time_limit", "seconds per solve");
}

void backend_options(CLI::App* app, Settings& s) {
  setting(app, s, "--backend", "backend", "live or replay");
  setting(app, s, "--fixtures", "fixtures", "replay fixture directory");
  setting(app, s, "--record", "record", "directory that receives a fixture per exchange");
  setting(app, s, "--endpoint", "endpoint", "live endpoint, scheme://host[:port]");
  setting(app, s, "--model", "model", "model name sent to the live endpoint");
  setting(app, s, "--temperature", "temperature", "sampling temperature for non-formulation prompts");
}

SolverConfig solver_config(const Settings& s) {
  SolverConfig c;
  const auto mode = s.text("solver", "auto");
  if (mode == "auto") {
    c.mode = SolverMode::kAuto;
  } else if (mode == "builtin") {
    c.mode = SolverMode::kBuiltin;
  } else if (mode == "external") {
    c.mode = SolverMode::kExternal;
  } else {
    throw ConfigError("solver must be auto, builtin or external, got '" + mode + "'");
  }
  c.limits.time_limit = s.number("time_limit", c.limits.time_limit);
  c.limits.node_limit = static_cast<std::size_t>(s.integer("node_limit", static_cast<std::int64_t>(c.limits.node_limit)));
  c.limits.check();
  if (const auto command = s.find("solver.command")) {
    ExternalSolverSpec spec;
    if (*command == "highs") {
      spec = ExternalSolverSpec::highs_runner(s.text("solver.highs_script", OPTSYNTH_TOOLS_DIR "/highs_lp_solve.py"));
    } else {
      spec.command_template = *command;
    }
    spec.max_concurrent = s.jobs();
    spec.check();
    c.external = spec;
  }
  if (c.mode == SolverMode::kExternal && !c.external) throw ConfigError("external solver mode needs solver.command");
  return c;
}

std::unique_ptr<Gateway> gateway(const Settings& s) {
  BackendConfig c;
  const auto kind = parse_backend_kind(s.text("backend", "replay"));
  if (!kind) throw ConfigError("backend must be live or replay");
  c.kind = *kind;
  c.endpoint = s.text("endpoint", "");
  c.path = s.text("path", c.path);
  c.model = s.text("model", "");
  c.temperature = s.number("temperature", c.temperature);
  c.max_retries = static_cast<int>(s.integer("max_retries", c.max_retries));
  c.backoff_initial = s.number("backoff_initial", c.backoff_initial);
  c.requests_per_minute = static_cast<int>(s.integer("requests_per_minute", c.requests_per_minute));
  c.request_timeout = s.number("request_timeout", c.request_timeout);
  c.api_key_env = s.text("api_key_env", c.api_key_env);
  c.fixture_dir = s.text("fixtures", "");
  c.check();
  GatewayOptions o;
  o.max_in_flight = static_cast<int>(s.integer("max_in_flight", o.max_in_flight));
  o.default_temperature = c.temperature;
  if (const auto record = s.find("record")) o.record_dir = *record;
  return std::make_unique<Gateway>(make_backend(c), o);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw Error("cannot write " + path.string());
}

ProblemData load_problem(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".lp") return parse_lp(read_file(path));
  if (ext == ".json") return problem_from_json_text(read_file(path));
  throw ConfigError("expected a .lp or .json model file, got " + path.string());
}

template <typename T>
std::vector<T> read_jsonl(const fs::path& path, std::vector<std::string>& skipped) {
  std::istringstream in(read_file(path));
  std::vector<T> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(T::from_json(json::parse(line)));
    } catch (const std::exception& e) {
      skipped.push_back(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::set<std::string> read_id_list(const fs::path& path) {
  std::set<std::string> ids;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty() && line.front() != '#') ids.insert(line);
  }
  return ids;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string scalar_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

void print_table(std::ostream& err, const json& summary) {
  for (const auto& [key, value] : summary.items()) {
    if (value.is_object()) {
      bool flat = std::all_of(value.begin(), value.end(), [](const json& v) { return v.is_primitive(); });
      if (flat) {
        for (const auto& [sub, v] : value.items()) err << "  " << key << "." << sub << "\t" << scalar_text(v) << "\n";
        continue;
      }
      err << "  " << key << "\t{...}\n";
    } else if (value.is_array()) {
      err << "  " << key << "\t[" << value.size() << " items]\n";
    } else {
      err << "  " << key << "\t" << scalar_text(value) << "\n";
    }
  }
}

int finish(std::ostream& out, std::ostream& err, json summary, int code) {
  summary["ok"] = code == kExitOk;
  summary["exit_code"] = code;
  out << summary.dump(2) << "\n";
  print_table(err, summary);
  return code;
}

int fail(std::ostream& out, std::ostream& err, const std::string& command, const std::string& message, int code) {
  err << "error: " << message << "\n";
  return finish(out, err, {{"command", command}, {"error", message}}, code);
}

std::map<std::string, std::size_t> count_reasons(const std::vector<TripletRecord>& rejected) {
  std::map<std::string, std::size_t> m;
  for (const auto& r : rejected) ++m[r.reject_reason];
  return m;
}

// ---- subcommands ----

struct GenerateArgs {
  std::string class_id;
  std::size_t count = 1;
  std::vector<std::string> params;
  std::string params_file;
  std::string out_dir = ".";
  bool list = false;
};

int cmd_generate(const GenerateArgs& a, const Settings& s, std::ostream& out, std::ostream& err) {
  if (a.list) {
    json classes = json::array();
    for (const auto& schema : list_classes()) classes.push_back(schema.to_json());
    return finish(out, err, {{"command", "generate"}, {"classes", classes}}, kExitOk);
  }
  if (a.class_id.empty()) throw ConfigError("generate needs a class id (see --list)");
  const auto& schema = find_class(a.class_id).schema;
  GeneratorConfig cfg;
  cfg.class_id = a.class_id;
  cfg.seed = s.seed();
  try {
    json raw = a.params_file.empty() ? json::object() : json::parse(read_file(a.params_file));
    if (!raw.is_object()) throw ConfigError("parameter file must hold a JSON object");
    for (const auto& p : a.params) {
      const auto eq = p.find('=');
      if (eq == std::string::npos) throw ConfigError("--param expects name=value, got '" + p + "'");
      const auto value = p.substr(eq + 1);
      auto parsed = json::parse(value, nullptr, false);
      raw[trim(p.substr(0, eq))] = parsed.is_discarded() ? json(value) : parsed;
    }
    cfg.parameters = params_from_json(schema, raw);
    check_config(schema, cfg);
  } catch (const ConfigError&) {
    err << "parameters of " << a.class_id << ":\n" << schema.to_json()["parameters"].dump(2) << "\n";
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("parameter file is not valid JSON: ") + e.what());
  }

  const auto batch = generate_batch(cfg, a.count, s.jobs());
  const fs::path dir = a.out_dir;
  fs::create_directories(dir);
  json items = json::array();
  std::size_t failures = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    char stem[64];
    std::snprintf(stem, sizeof stem, "%s_%04zu", a.class_id.c_str(), i);
    json item = {{"index", i}, {"seed", batch[i].seed}};
    if (!batch[i].problem) {
      ++failures;
      item["error"] = batch[i].error;
    } else {
      write_file(dir / (std::string(stem) + ".json"), to_json_text(*batch[i].problem, 2) + "\n");
      item["json"] = std::string(stem) + ".json";
      try {
        write_file(dir / (std::string(stem) + ".lp"), emit_lp(*batch[i].problem));
        item["lp"] = std::string(stem) + ".lp";
      } catch (const UnsupportedConstructError& e) {
        item["lp"] = nullptr;
        item["lp_error"] = e.what();
      }
    }
    items.push_back(item);
  }
  json manifest = {{"class_id", a.class_id},
                   {"seed", cfg.seed},
                   {"count", a.count},
                   {"parameters", params_to_json(resolve_parameters(schema, cfg))},
                   {"items", items}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return finish(out, err,
                {{"command", "generate"},
                 {"class_id", a.class_id},
                 {"generated", a.count - failures},
                 {"failed", failures},
                 {"out", dir.string()}},
                failures == 0 ? kExitOk : kExitStageFailure);
}

int cmd_score(const std::string& file, const Settings& s, std::ostream& out, std::ostream& err) {
  const auto pd = load_problem(file);
  const auto weights = weights_from_config(s.file);
  const auto tiers = tiers_from_config(s.file);
  const auto report = score(pd, weights, s.number("bigm_threshold", kDefaultBigMThreshold));
  return finish(out, err,
                {{"command", "score"},
                 {"file", file},
                 {"report", report.to_json()},
                 {"score", report.score},
                 {"tiers", tier_names(report.score, tiers)},
                 {"primary_tier", primary_tier(report.score, tiers)}},
                kExitOk);
}

int cmd_solve(const std::string& file, const Settings& s, std::ostream& out, std::ostream& err) {
  const auto outcome = solve(load_problem(file), solver_config(s));
  json summary = {{"command", "solve"}, {"file", file}, {"status", std::string(to_string(outcome.status))}};
  summary["objective"] = outcome.objective ? json(*outcome.objective) : json(nullptr);
  summary["outcome"] = outcome.to_json();
  return finish(out, err, summary, outcome.status == SolveStatus::kError ? kExitStageFailure : kExitOk);
}

int cmd_tune(const std::string& class_id, const Settings& s, std::ostream& out, std::ostream& err) {
  const auto& schema = find_class(class_id).schema;
  TuningTargets t;
  t.complexity_min = s.number("complexity_min", t.complexity_min);
  t.complexity_max = s.number("complexity_max", t.complexity_max);
  t.time_min = s.number("time_min", t.time_min);
  t.time_max = s.number("time_max", t.time_max);
  t.feasibility_target = s.number("feasibility_target", t.feasibility_target);
  t.batch_size = static_cast<std::size_t>(s.integer("batch_size", static_cast<std::int64_t>(t.batch_size)));
  t.max_iterations = static_cast<int>(s.integer("max_iterations", t.max_iterations));
  t.check();

  TuneOptions o;
  o.seed = s.seed();
  o.evaluation.solver = solver_config(s);
  o.evaluation.weights = weights_from_config(s.file);
  o.evaluation.bigm_threshold = s.number("bigm_threshold", kDefaultBigMThreshold);
  o.evaluation.jobs = s.jobs();
  if (s.find("work_unit")) o.evaluation.work_unit = s.number("work_unit", 0.0);
  if (const auto log = s.find("log")) o.log_path = *log;

  const auto advisor_kind = s.text("advisor", "rule");
  TuneResult result;
  if (advisor_kind == "rule") {
    RuleBasedAdvisor advisor;
    result = tune(schema, t, advisor, o);
  } else if (advisor_kind == "llm") {
    auto gw = gateway(s);
    LlmAdvisor advisor(*gw);
    result = tune(schema, t, advisor, o);
  } else {
    throw ConfigError("advisor must be rule or llm, got '" + advisor_kind + "'");
  }
  if (const auto path = s.find("out"); path && result.config) {
    write_file(*path, json{{"class_id", class_id}, {"parameters", params_to_json(result.config->parameters)}}.dump(2) +
                          "\n");
  }
  json summary = result.to_json();
  summary["command"] = "tune";
  summary["class_id"] = class_id;
  return finish(out, err, summary, result.config ? kExitOk : kExitStageFailure);
}

std::vector<fs::path> model_files(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(in)) {
        const auto& p = e.path();
        if (p.extension() == ".json" && p.filename() != "manifest.json") found.push_back(p);
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(in)) {
      files.emplace_back(in);
    } else {
      throw ConfigError("input not found: " + in);
    }
  }
  if (files.empty()) throw ConfigError("no model files in the inputs");
  return files;
}

int cmd_synthesize(const std::vector<std::string>& inputs, const std::string& out_dir, const Settings& s,
                   std::ostream& out, std::ostream& err) {
  const auto tiers = tiers_from_config(s.file);
  std::vector<SourceInstance> sources;
  for (const auto& f : model_files(inputs)) {
    auto pd = load_problem(f);
    if (pd.name.empty()) pd.name = f.stem().string();
    sources.push_back(make_source(pd, tiers));
  }
  SynthesisOptions o;
  o.refine_rounds = static_cast<int>(s.integer("refine_rounds", o.refine_rounds));
  o.eps = s.number("eps", o.eps);
  o.seed = s.seed();
  if (const auto sc = s.find("scenarios")) o.scenarios = split_list(*sc);
  if (const auto ex = s.find("examples")) o.examples = read_file(*ex);
  o.solver = solver_config(s);
  o.jobs = s.jobs();
  auto gw = gateway(s);
  const auto run = synthesize_all(*gw, sources, o, fs::path(out_dir));

  const auto reasons = count_reasons(run.rejected);
  std::size_t transport = 0;
  for (const char* r : {"backtranslation-error", "autoformulation-error"}) {
    if (auto it = reasons.find(r); it != reasons.end()) transport += it->second;
  }
  const double total = static_cast<double>(sources.size());
  json summary = {{"command", "synthesize"},
                  {"total", sources.size()},
                  {"accepted", run.accepted.size()},
                  {"rejected", run.rejected.size()},
                  {"acceptance_rate", static_cast<double>(run.accepted.size()) / total},
                  {"reasons", reasons},
                  {"out", out_dir}};
  // Every record lost to transport failures means the stage did not run.
  const bool stage_failed = transport == sources.size();
  return finish(out, err, summary, stage_failed ? kExitStageFailure : kExitOk);
}

int cmd_augment(const std::string& input, const std::string& out_dir, int target, const std::string& rules_arg,
                const Settings& s, std::ostream& out, std::ostream& err) {
  std::vector<std::string> skipped;
  auto records = read_jsonl<TripletRecord>(input, skipped);
  std::erase_if(records, [&](const TripletRecord& r) {
    if (r.verdict == Verdict::kAccepted) return false;
    skipped.push_back(r.id + ": not accepted");
    return true;
  });
  std::vector<AugmentationRule> rules;
  if (rules_arg.empty()) {
    rules = augmentation_rules();
  } else {
    for (const auto& id : split_list(rules_arg)) rules.push_back(find_rule(id));
  }
  AugmentOptions o;
  o.eps = s.number("eps", o.eps);
  o.seed = s.seed();
  o.solver = solver_config(s);
  o.jobs = s.jobs();
  o.attempt_cap_factor = static_cast<int>(s.integer("attempt_cap_factor", o.attempt_cap_factor));
  auto gw = gateway(s);
  const auto run = augment_corpus(*gw, records, rules, target, o);
  write_candidates(fs::path(out_dir) / "augmented.jsonl", run.candidates);

  std::map<std::string, std::size_t> reasons;
  std::size_t qualified = 0;
  for (const auto& c : run.candidates) {
    if (c.qualified) {
      ++qualified;
    } else {
      ++reasons[c.reason];
    }
  }
  for (const auto& [id, missing] : run.shortfall) {
    err << "shortfall: " << id << " is " << missing << " short of " << target << " qualified rewrites\n";
  }
  for (const auto& line : skipped) err << "skipped: " << line << "\n";
  return finish(out, err,
                {{"command", "augment"},
                 {"records", records.size()},
                 {"candidates", run.candidates.size()},
                 {"qualified", qualified},
                 {"disqualified", run.candidates.size() - qualified},
                 {"reasons", reasons},
                 {"shortfall", run.shortfall},
                 {"skipped", skipped},
                 {"out", out_dir}},
                kExitOk);
}

struct TrainArgs {
  std::string accepted, augmented, rejected, out_dir = "train";
};

int cmd_build_train(const TrainArgs& a, const Settings& s, std::ostream& out, std::ostream& err) {
  std::vector<std::string> skipped;
  const auto accepted = read_jsonl<TripletRecord>(a.accepted, skipped);
  std::vector<AugmentedCandidate> augmented;
  if (!a.augmented.empty()) augmented = read_jsonl<AugmentedCandidate>(a.augmented, skipped);
  std::optional<std::size_t> rejected_count;
  if (!a.rejected.empty()) rejected_count = read_jsonl<TripletRecord>(a.rejected, skipped).size();
  TrainOptions o;
  o.seed = s.seed();
  o.tiers = tiers_from_config(s.file);
  const auto b = build_train(accepted, augmented, o, rejected_count);
  skipped.insert(skipped.end(), b.skipped.begin(), b.skipped.end());
  write_corpus(a.out_dir, b.records, b.stats, {{"seed", o.seed}, {"duplicates", b.duplicates}, {"skipped", skipped}});
  for (const auto& line : skipped) err << "skipped: " << line << "\n";
  return finish(out, err,
                {{"command", "build train"},
                 {"records", b.records.size()},
                 {"duplicates", b.duplicates},
                 {"skipped", skipped.size()},
                 {"out", a.out_dir}},
                kExitOk);
}

struct BenchArgs {
  std::string rejected, out_dir = "bench", include, exclude, coverage, tier_floor;
  std::size_t min_nl_length = 0, class_quota = 0;
};

int cmd_build_bench(const BenchArgs& a, const Settings& s, std::ostream& out, std::ostream& err) {
  std::vector<std::string> skipped;
  const auto rejected = read_jsonl<TripletRecord>(a.rejected, skipped);
  BenchSelection sel;
  sel.min_nl_length = a.min_nl_length;
  sel.tier_floor = a.tier_floor;
  sel.class_quota = a.class_quota;
  sel.tiers = tiers_from_config(s.file);
  if (!a.coverage.empty()) {
    const auto types = split_list(a.coverage);
    sel.coverage = {types.begin(), types.end()};
  }
  if (!a.include.empty()) sel.include = read_id_list(a.include);
  if (!a.exclude.empty()) sel.exclude = read_id_list(a.exclude);
  const auto b = build_bench(rejected, sel, solver_config(s));
  const auto stats = compute_stats(b.records);
  write_corpus(a.out_dir, b.records, stats);
  write_file(fs::path(a.out_dir) / "coverage.json", b.report().dump(2) + "\n");
  for (const auto& w : b.warnings) err << "warning: " << w << "\n";
  for (const auto& line : skipped) err << "skipped: " << line << "\n";
  json summary = b.report();
  summary["command"] = "build bench";
  summary["skipped"] = skipped.size();
  summary["out"] = a.out_dir;
  return finish(out, err, summary, kExitOk);
}

int cmd_grade(const std::string& bench, const std::string& predictions, const Settings& s, std::ostream& out,
              std::ostream& err) {
  const auto report = grade(read_corpus(bench), read_predictions(predictions), s.number("eps", 1e-6));
  json summary = report.to_json();
  summary["command"] = "grade";
  return finish(out, err, summary, kExitOk);
}

}  // namespace

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

std::string env_name(const std::string& key) {
  std::string out = "OPTSYNTH_";
  for (char c : key) out += (c == '.' || c == '-') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  CLI::App app("optsynth: optimization problem generation, synthesis and benchmarking", "optsynth");
  app.require_subcommand(1);
  Settings s(env);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate instances of a problem class");
  generate->add_option("class", gen.class_id, "problem class id");
  generate->add_option("-n,--count", gen.count, "number of instances");
  generate->add_option("-p,--param", gen.params, "name=value, value in JSON")->take_all();
  generate->add_option("--params", gen.params_file, "JSON object of parameters");
  generate->add_option("-o,--out", gen.out_dir, "output directory");
  generate->add_flag("--list", gen.list, "list the problem classes and their parameters");
  common_options(generate, s);

  std::string model_file;
  auto* score_cmd = app.add_subcommand("score", "Complexity score of a model file");
  score_cmd->add_option("file", model_file, ".lp or .json model")->required();
  common_options(score_cmd, s);
  setting(score_cmd, s, "--bigm-threshold", "bigm_threshold", "minimum big-M coefficient");

  auto* solve_cmd = app.add_subcommand("solve", "Solve a model file");
  solve_cmd->add_option("file", model_file, ".lp or .json model")->required();
  common_options(solve_cmd, s);
  solver_options(solve_cmd, s);

  std::string class_id;
  auto* tune_cmd = app.add_subcommand("tune", "Tune generator parameters toward targets");
  tune_cmd->add_option("class", class_id, "problem class id")->required();
  common_options(tune_cmd, s);
  solver_options(tune_cmd, s);
  backend_options(tune_cmd, s);
  setting(tune_cmd, s, "--advisor", "advisor", "rule or llm");
  setting(tune_cmd, s, "--complexity-min", "complexity_min", "lower complexity target");
  setting(tune_cmd, s, "--complexity-max", "complexity_max", "upper complexity target");
  setting(tune_cmd, s, "--time-min", "time_min", "lower mean solve time, seconds");
  setting(tune_cmd, s, "--time-max", "time_max", "upper mean solve time, seconds");
  setting(tune_cmd, s, "--feasibility", "feasibility_target", "required optimal fraction");
  setting(tune_cmd, s, "--batch", "batch_size", "instances per evaluation");
  setting(tune_cmd, s, "--iterations", "max_iterations", "iteration budget");
  setting(tune_cmd, s, "--work-unit", "work_unit", "seconds per simplex iteration instead of wall clock");
  setting(tune_cmd, s, "--log", "log", "JSONL session log");
  setting(tune_cmd, s, "--out", "out", "write the accepted parameters here");

  std::vector<std::string> inputs;
  std::string out_dir;
  auto* synth = app.add_subcommand("synthesize", "Backtranslate, reformulate and verify instances");
  synth->add_option("-i,--input", inputs, "model files or directories of .json models")->required();
  synth->add_option("-o,--out", out_dir, "output directory")->required();
  common_options(synth, s);
  solver_options(synth, s);
  backend_options(synth, s);
  setting(synth, s, "--rounds", "refine_rounds", "criticism and refinement rounds");
  setting(synth, s, "--eps", "eps", "relative tolerance on optimal values");
  setting(synth, s, "--scenarios", "scenarios", "comma-separated scenario list");
  setting(synth, s, "--examples", "examples", "file of reference examples for the first prompt");

  std::string input;
  int target = 10;
  std::string rules;
  auto* aug = app.add_subcommand("augment", "Rewrite accepted records and keep agreeing rewrites");
  aug->add_option("-i,--input", input, "accepted.jsonl")->required();
  aug->add_option("-o,--out", out_dir, "output directory")->required();
  aug->add_option("--target", target, "qualified rewrites per record");
  aug->add_option("--rules", rules, "comma-separated rule ids, default all");
  common_options(aug, s);
  solver_options(aug, s);
  backend_options(aug, s);
  setting(aug, s, "--eps", "eps", "relative tolerance on optimal values");

  auto* build = app.add_subcommand("build", "Assemble corpora");
  build->require_subcommand(1);
  TrainArgs train_args;
  auto* train = build->add_subcommand("train", "Training corpus from accepted and augmented records");
  train->add_option("--accepted", train_args.accepted, "accepted.jsonl")->required();
  train->add_option("--augmented", train_args.augmented, "augmented.jsonl");
  train->add_option("--rejected", train_args.rejected, "rejected.jsonl, for the acceptance rate");
  train->add_option("-o,--out", train_args.out_dir, "output directory");
  common_options(train, s);
  BenchArgs bench_args;
  auto* bench = build->add_subcommand("bench", "Benchmark corpus from rejected records");
  bench->add_option("--rejected", bench_args.rejected, "rejected.jsonl")->required();
  bench->add_option("-o,--out", bench_args.out_dir, "output directory");
  bench->add_option("--min-nl-length", bench_args.min_nl_length, "minimum description length in characters");
  bench->add_option("--tier-floor", bench_args.tier_floor, "lowest tier kept");
  bench->add_option("--class-quota", bench_args.class_quota, "records per class, 0 for no limit");
  bench->add_option("--coverage", bench_args.coverage, "comma-separated problem types to report on");
  bench->add_option("--include", bench_args.include, "file of eligible ids, one per line");
  bench->add_option("--exclude", bench_args.exclude, "file of excluded ids, one per line");
  common_options(bench, s);
  solver_options(bench, s);

  std::string bench_file, preds_file;
  auto* grade_cmd = app.add_subcommand("grade", "Grade predicted optimal values against a benchmark");
  grade_cmd->add_option("bench", bench_file, "benchmark corpus.jsonl")->required();
  grade_cmd->add_option("predictions", preds_file, "predictions file")->required();
  common_options(grade_cmd, s);
  setting(grade_cmd, s, "--eps", "eps", "relative tolerance");

  std::vector<std::string> argv_store;
  argv_store.push_back("optsynth");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return fail(out, err, "", e.what(), kExitUsage);
  }

  std::string command;
  for (const auto* sub : app.get_subcommands()) command = sub->get_name();
  try {
    s.load_config();
    if (generate->parsed()) return cmd_generate(gen, s, out, err);
    if (score_cmd->parsed()) return cmd_score(model_file, s, out, err);
    if (solve_cmd->parsed()) return cmd_solve(model_file, s, out, err);
    if (tune_cmd->parsed()) return cmd_tune(class_id, s, out, err);
    if (synth->parsed()) return cmd_synthesize(inputs, out_dir, s, out, err);
    if (aug->parsed()) return cmd_augment(input, out_dir, target, rules, s, out, err);
    if (train->parsed()) return cmd_build_train(train_args, s, out, err);
    if (bench->parsed()) return cmd_build_bench(bench_args, s, out, err);
    if (grade_cmd->parsed()) return cmd_grade(bench_file, preds_file, s, out, err);
  } catch (const ConfigError& e) {
    return fail(out, err, command, e.what(), kExitUsage);
  } catch (const ParseError& e) {
    return fail(out, err, command, e.what(), kExitUsage);
  } catch (const std::exception& e) {
    return fail(out, err, command, e.what(), kExitStageFailure);
  }
  return fail(out, err, command, "no subcommand", kExitUsage);
}

}  // namespace optsynth::cli
