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
#include <array>

#include <openssl/evp.h>

#include "optsynth/llm.hpp"

namespace optsynth {

namespace detail {
const std::map<std::string, std::string_view>& prompt_assets();
}

namespace {

constexpr std::array<std::pair<PromptId, std::string_view>, 8> kPromptNames{{
    {PromptId::kInitialGeneration, "initial_generation"},
    {PromptId::kSelfCriticism, "self_criticism"},
    {PromptId::kSelfRefinement, "self_refinement"},
    {PromptId::kAutoformulation, "autoformulation"},
    {PromptId::kAugmentation, "augmentation"},
    {PromptId::kInitConfig, "init_config"},
    {PromptId::kRefineConfig, "refine_config"},
    {PromptId::kFormatRepair, "format_repair"},
}};

std::string_view asset_text(const std::string& stem) {
  const auto& assets = detail::prompt_assets();
  auto it = assets.find(stem);
  if (it == assets.end()) throw ConfigError("missing prompt asset '" + stem + "'");
  return it->second;
}

struct Placeholder {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past the closing braces
  std::string name;
  bool optional = false;
};

std::vector<Placeholder> scan(std::string_view body) {
  std::vector<Placeholder> out;
  std::size_t pos = 0;
  while ((pos = body.find("{{", pos)) != std::string_view::npos) {
    const auto close = body.find("}}", pos + 2);
    if (close == std::string_view::npos) break;
    std::string name(body.substr(pos + 2, close - pos - 2));
    Placeholder p{pos, close + 2, name, false};
    if (!name.empty() && name.back() == '?') {
      p.optional = true;
      p.name.pop_back();
    }
    const bool valid = !p.name.empty() && std::all_of(p.name.begin(), p.name.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
    if (valid) {
      out.push_back(std::move(p));
      pos = close + 2;
    } else {
      pos += 2;
    }
  }
  return out;
}

void add_unique(std::vector<std::string>& v, const std::string& s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

}  // namespace

std::string_view to_string(PromptId id) {
  for (const auto& [k, name] : kPromptNames) {
    if (k == id) return name;
  }
  return "unknown";
}

std::optional<PromptId> parse_prompt_id(std::string_view s) {
  for (const auto& [k, name] : kPromptNames) {
    if (name == s) return k;
  }
  return std::nullopt;
}

const std::vector<PromptId>& all_prompt_ids() {
  static const std::vector<PromptId> ids = [] {
    std::vector<PromptId> v;
    for (const auto& [k, name] : kPromptNames) v.push_back(k);
    return v;
  }();
  return ids;
}

PromptTemplate parse_prompt_asset(PromptId id, std::string_view text) {
  PromptTemplate t;
  t.id = id;
  std::size_t pos = 0;
  while (pos < text.size() && text.substr(pos, 3) == "##!") {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string line(text.substr(pos + 3, eol - pos - 3));
    line.erase(0, line.find_first_not_of(' '));
    if (line.rfind("version:", 0) == 0) {
      t.version = line.substr(8);
      t.version.erase(0, t.version.find_first_not_of(' '));
    } else {
      t.notes.push_back(line);
    }
    pos = eol + 1;
  }
  t.body = std::string(text.substr(std::min(pos, text.size())));
  while (!t.body.empty() && t.body.back() == '\n') t.body.pop_back();
  for (const auto& p : scan(t.body)) add_unique(p.optional ? t.optional : t.required, p.name);
  for (const auto& name : t.required) {
    if (std::find(t.optional.begin(), t.optional.end(), name) != t.optional.end()) {
      throw ConfigError("placeholder '" + name + "' is both required and optional in " +
                        std::string(to_string(id)));
    }
  }
  return t;
}

const PromptTemplate& prompt_template(PromptId id) {
  static const std::map<PromptId, PromptTemplate> templates = [] {
    std::map<PromptId, PromptTemplate> m;
    for (const auto& [k, name] : kPromptNames) m.emplace(k, parse_prompt_asset(k, asset_text(std::string(name))));
    return m;
  }();
  return templates.at(id);
}

std::string render(const PromptTemplate& t, const Bindings& bindings) {
  for (const auto& name : t.required) {
    if (!bindings.count(name)) {
      throw RenderError("prompt '" + std::string(to_string(t.id)) + "' is missing placeholder '" + name + "'",
                        name);
    }
  }
  std::string out;
  std::size_t last = 0;
  for (const auto& p : scan(t.body)) {
    out.append(t.body, last, p.begin - last);
    auto it = bindings.find(p.name);
    if (it != bindings.end()) out += it->second;
    last = p.end;
  }
  out.append(t.body, last, std::string::npos);
  return out;
}

std::string render(PromptId id, const Bindings& bindings) { return render(prompt_template(id), bindings); }

const std::vector<std::string>& autoformulation_instructions() {
  static const std::vector<std::string> list = [] {
    std::vector<std::string> v;
    const auto text = asset_text("autoformulation_instructions");
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto eol = text.find('\n', pos);
      if (eol == std::string_view::npos) eol = text.size();
      const auto line = text.substr(pos, eol - pos);
      if (!line.empty() && line.substr(0, 3) != "##!") v.emplace_back(line);
      pos = eol + 1;
    }
    return v;
  }();
  return list;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string replay_key(std::string_view prompt, int sample) {
  if (sample == 0) return sha256_hex(prompt);
  std::string keyed(prompt);
  keyed += "\n#sample=" + std::to_string(sample);
  return sha256_hex(keyed);
}

}  // namespace optsynth
