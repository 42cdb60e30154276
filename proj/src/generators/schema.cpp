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
#include <thread>

#include <fmt/format.h>

#include "optsynth/errors.hpp"
#include "optsynth/generators.hpp"

namespace optsynth {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool fits(ParamType type, const ParamValue& v) {
  switch (type) {
    case ParamType::kInteger: return std::holds_alternative<std::int64_t>(v);
    case ParamType::kReal: return std::holds_alternative<double>(v) || std::holds_alternative<std::int64_t>(v);
    case ParamType::kIntRange: return std::holds_alternative<IntRange>(v);
    case ParamType::kRealRange: return std::holds_alternative<RealRange>(v);
    case ParamType::kList: return std::holds_alternative<std::vector<double>>(v);
  }
  return false;
}

void check_value(const ParamDecl& decl, const ParamValue& v) {
  if (!fits(decl.type, v)) {
    throw ConfigError(fmt::format("parameter '{}' must be {}", decl.name, to_string(decl.type)));
  }
  auto in_range = [&](double x) {
    if (!std::isfinite(x) || x < decl.min || x > decl.max) {
      throw ConfigError(fmt::format("parameter '{}' value {} outside [{}, {}]", decl.name, format_number(x),
                                    format_number(decl.min), format_number(decl.max)));
    }
  };
  std::visit(Overloaded{
                 [&](std::int64_t x) { in_range(static_cast<double>(x)); },
                 [&](double x) { in_range(x); },
                 [&](const IntRange& r) {
                   if (r.low > r.high) throw ConfigError(fmt::format("parameter '{}' has low > high", decl.name));
                   in_range(static_cast<double>(r.low));
                   in_range(static_cast<double>(r.high));
                 },
                 [&](const RealRange& r) {
                   if (r.low > r.high) throw ConfigError(fmt::format("parameter '{}' has low > high", decl.name));
                   in_range(r.low);
                   in_range(r.high);
                 },
                 [&](const std::vector<double>& list) {
                   for (double x : list) in_range(x);
                 },
             },
             v);
}

}  // namespace

std::string_view to_string(ParamType type) {
  switch (type) {
    case ParamType::kInteger: return "integer";
    case ParamType::kReal: return "real";
    case ParamType::kIntRange: return "integer range";
    case ParamType::kRealRange: return "real range";
    case ParamType::kList: return "list";
  }
  return "?";
}

const ParamDecl* GeneratorSchema::find(std::string_view name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

nlohmann::json GeneratorSchema::to_json() const {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : parameters) {
    params.push_back({{"name", p.name},
                      {"type", std::string(optsynth::to_string(p.type))},
                      {"min", p.min},
                      {"max", p.max},
                      {"default", param_to_json(p.default_value)},
                      {"description", p.description}});
  }
  return {{"class_id", class_id},
          {"subclass", metadata.subclass},
          {"formulation", metadata.formulation},
          {"reference", metadata.reference},
          {"size_parameter", size_parameter},
          {"parameters", params}};
}

nlohmann::json param_to_json(const ParamValue& v) {
  return std::visit(Overloaded{
                        [](std::int64_t x) { return nlohmann::json(x); },
                        [](double x) { return nlohmann::json(x); },
                        [](const IntRange& r) { return nlohmann::json::array({r.low, r.high}); },
                        [](const RealRange& r) { return nlohmann::json::array({r.low, r.high}); },
                        [](const std::vector<double>& l) { return nlohmann::json(l); },
                    },
                    v);
}

std::string param_to_string(const ParamValue& v) {
  return std::visit(Overloaded{
                        [](std::int64_t x) { return std::to_string(x); },
                        [](double x) { return format_number(x); },
                        [](const IntRange& r) { return fmt::format("[{}, {}]", r.low, r.high); },
                        [](const RealRange& r) {
                          return fmt::format("[{}, {}]", format_number(r.low), format_number(r.high));
                        },
                        [](const std::vector<double>& l) {
                          std::string s = "[";
                          for (std::size_t i = 0; i < l.size(); ++i) s += (i ? ", " : "") + format_number(l[i]);
                          return s + "]";
                        },
                    },
                    v);
}

ParamValue param_from_json(const ParamDecl& decl, const nlohmann::json& j) {
  auto bad = [&]() {
    return ConfigError(fmt::format("parameter '{}' must be {}, got {}", decl.name, to_string(decl.type), j.dump()));
  };
  auto integral = [&](const nlohmann::json& x) -> std::int64_t {
    if (x.is_number_integer()) return x.get<std::int64_t>();
    if (x.is_number_float()) {
      const double d = x.get<double>();
      if (std::isfinite(d) && d == std::round(d) && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
    }
    throw bad();
  };
  auto real = [&](const nlohmann::json& x) -> double {
    if (!x.is_number()) throw bad();
    return x.get<double>();
  };
  switch (decl.type) {
    case ParamType::kInteger: return integral(j);
    case ParamType::kReal: return real(j);
    case ParamType::kIntRange:
      if (j.is_array() && j.size() == 2) return IntRange{integral(j[0]), integral(j[1])};
      if (j.is_number()) {
        const auto v = integral(j);
        return IntRange{v, v};
      }
      throw bad();
    case ParamType::kRealRange:
      if (j.is_array() && j.size() == 2) return RealRange{real(j[0]), real(j[1])};
      if (j.is_number()) return RealRange{real(j), real(j)};
      throw bad();
    case ParamType::kList: {
      if (!j.is_array()) throw bad();
      std::vector<double> out;
      for (const auto& x : j) out.push_back(real(x));
      return out;
    }
  }
  throw bad();
}

nlohmann::json params_to_json(const ParamMap& params) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : params) j[k] = param_to_json(v);
  return j;
}

ParamMap params_from_json(const GeneratorSchema& schema, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("parameters must be a JSON object");
  ParamMap out;
  for (const auto& [key, value] : j.items()) {
    const auto* decl = schema.find(key);
    if (!decl) throw ConfigError(fmt::format("unknown parameter '{}' for {}", key, schema.class_id));
    out[key] = param_from_json(*decl, value);
  }
  return out;
}

void check_config(const GeneratorSchema& schema, const GeneratorConfig& cfg) {
  if (cfg.class_id != schema.class_id) {
    throw ConfigError(fmt::format("config is for '{}', schema is '{}'", cfg.class_id, schema.class_id));
  }
  for (const auto& [name, value] : cfg.parameters) {
    const auto* decl = schema.find(name);
    if (!decl) throw ConfigError(fmt::format("unknown parameter '{}' for {}", name, schema.class_id));
    check_value(*decl, value);
  }
}

ParamMap resolve_parameters(const GeneratorSchema& schema, const GeneratorConfig& cfg) {
  check_config(schema, cfg);
  ParamMap out;
  for (const auto& decl : schema.parameters) {
    auto it = cfg.parameters.find(decl.name);
    ParamValue v = it == cfg.parameters.end() ? decl.default_value : it->second;
    if (decl.type == ParamType::kReal && std::holds_alternative<std::int64_t>(v)) {
      v = static_cast<double>(std::get<std::int64_t>(v));
    }
    out[decl.name] = std::move(v);
  }
  return out;
}

const ParamValue& ParamDraws::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("generator asked for undeclared parameter '" + name + "'");
  return it->second;
}

std::int64_t ParamDraws::integer(const std::string& name) {
  const auto& v = get(name);
  if (const auto* x = std::get_if<std::int64_t>(&v)) return *x;
  if (const auto* r = std::get_if<IntRange>(&v)) return rng_.uniform_int(r->low, r->high);
  throw ConfigError("parameter '" + name + "' is not an integer");
}

std::int64_t ParamDraws::recorded_integer(const std::string& name) {
  const auto v = integer(name);
  recorded_[name] = std::to_string(v);
  return v;
}

double ParamDraws::real(const std::string& name) {
  const auto& v = get(name);
  if (const auto* x = std::get_if<double>(&v)) return *x;
  if (const auto* x = std::get_if<std::int64_t>(&v)) return static_cast<double>(*x);
  if (const auto* r = std::get_if<RealRange>(&v)) return r->low == r->high ? r->low : rng_.uniform_real(r->low, r->high);
  if (const auto* r = std::get_if<IntRange>(&v)) return static_cast<double>(rng_.uniform_int(r->low, r->high));
  throw ConfigError("parameter '" + name + "' is not numeric");
}

const std::vector<double>& ParamDraws::list(const std::string& name) const {
  const auto& v = get(name);
  if (const auto* l = std::get_if<std::vector<double>>(&v)) return *l;
  throw ConfigError("parameter '" + name + "' is not a list");
}

std::vector<GeneratorSchema> list_classes() {
  std::vector<GeneratorSchema> out;
  for (const auto& c : registry()) out.push_back(c.schema);
  return out;
}

const GeneratorClass& find_class(std::string_view class_id) {
  for (const auto& c : registry()) {
    if (c.schema.class_id == class_id) return c;
  }
  throw ConfigError(fmt::format("unknown generator class '{}'", class_id));
}

ProblemData generate(const GeneratorConfig& cfg) {
  const auto& cls = find_class(cfg.class_id);
  const auto params = resolve_parameters(cls.schema, cfg);
  for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(attempt);
    Rng rng(seed);
    ParamDraws draws(params, rng);
    auto built = cls.build(draws);
    if (!built) continue;
    ProblemData pd = normalize(*built);
    pd.name = fmt::format("{}_{}", cfg.class_id, cfg.seed);
    pd.metadata["class_id"] = cfg.class_id;
    pd.metadata["seed"] = std::to_string(cfg.seed);
    pd.metadata["attempts"] = std::to_string(attempt + 1);
    pd.metadata["parameters"] = params_to_json(params).dump();
    for (const auto& [k, v] : draws.recorded()) pd.metadata["draw." + k] = v;
    const auto diagnostics = validate(pd);
    if (!diagnostics.empty()) {
      throw Error(fmt::format("{} produced an invalid model: {}: {}", cfg.class_id, diagnostics[0].location,
                              diagnostics[0].message));
    }
    return pd;
  }
  throw GenerationError(fmt::format("{}: no usable draw after {} attempts from seed {}", cfg.class_id,
                                    kMaxGenerationAttempts, cfg.seed));
}

std::vector<BatchItem> generate_batch(const GeneratorConfig& cfg, std::size_t n, std::size_t jobs) {
  if (n == 0) throw ConfigError("batch size must be at least 1");
  find_class(cfg.class_id);
  std::vector<BatchItem> items(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      GeneratorConfig sub = cfg;
      sub.seed = sub_seed(cfg.seed, i);
      items[i].seed = sub.seed;
      try {
        items[i].problem = generate(sub);
      } catch (const Error& e) {
        items[i].error = e.what();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, n);
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < workers; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  return items;
}

void export_catalog(const std::filesystem::path& dir) {
  for (const auto& c : registry()) {
    const auto sub = dir / c.schema.class_id;
    std::filesystem::create_directories(sub);
    std::ofstream out(sub / "metadata.json", std::ios::binary);
    if (!out) throw Error("cannot write " + (sub / "metadata.json").string());
    out << c.schema.to_json().dump(2) << '\n';
  }
}

}  // namespace optsynth
