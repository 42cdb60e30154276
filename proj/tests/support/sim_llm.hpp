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

// A deterministic stand-in for the language model. Descriptions carry the LP
// text verbatim, so the formulation step can recover the exact model. Fault
// injection is keyed on a hash of the LP text, which keeps every reply a pure
// function of the prompt.

#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "json.hpp"
#include "optsynth/llm.hpp"
#include "optsynth/lp_io.hpp"
#include "optsynth/model_json.hpp"

namespace optsynth::testing {

struct SimLlmOptions {
  double mismatch_rate = 0.0;     // formulation with objective 2f+1
  double garble_rate = 0.0;       // unparseable first reply, fixed on repair
  double unrepairable_rate = 0.0; // unparseable reply, repair fails as well
  double disagree_rate = 0.0;     // samples other than 0 use objective 2f+1
  double empty_rate = 0.0;        // augmentation returns nothing
  std::string salt;
};

inline std::string extract_lp(const std::string& text) {
  std::size_t begin = std::string::npos;
  for (const char* head : {"Minimize\n", "Maximize\n"}) {
    for (std::size_t at = text.find(head); at != std::string::npos; at = text.find(head, at + 1)) {
      if (at == 0 || text[at - 1] == '\n') {
        begin = std::min(begin, at);
        break;
      }
    }
  }
  if (begin == std::string::npos) return {};
  const auto end = text.find("\nEnd", begin);
  if (end == std::string::npos) return {};
  return text.substr(begin, end + 4 - begin) + "\n";
}

inline std::string between(const std::string& text, const std::string& open, const std::string& close) {
  const auto a = text.find(open);
  if (a == std::string::npos) return {};
  const auto b = text.find(close, a + open.size());
  return text.substr(a + open.size(), b == std::string::npos ? std::string::npos : b - a - open.size());
}

class SimLlm {
 public:
  explicit SimLlm(SimLlmOptions options = {}) : options_(std::move(options)) {}

  std::shared_ptr<Backend> backend() {
    return std::make_shared<ScriptedBackend>([this](const ChatRequest& r) { return reply(r); });
  }

  int calls(PromptId id) const {
    std::lock_guard lock(mutex_);
    auto it = calls_.find(id);
    return it == calls_.end() ? 0 : it->second;
  }
  int total_calls() const {
    std::lock_guard lock(mutex_);
    int n = 0;
    for (const auto& [id, c] : calls_) n += c;
    return n;
  }

  // Uniform in [0, 1) from the LP text and a tag.
  double draw(const std::string& lp, const std::string& tag) const {
    return static_cast<double>(std::stoull(sha256_hex(options_.salt + tag + lp).substr(0, 13), nullptr, 16)) /
           static_cast<double>(1ULL << 52);
  }

  std::string reply(const ChatRequest& r) {
    {
      std::lock_guard lock(mutex_);
      ++calls_[r.template_id];
    }
    const std::string lp = extract_lp(r.prompt);
    switch (r.template_id) {
      case PromptId::kInitialGeneration: {
        const auto scenario = between(r.prompt, "realistic ", " application");
        return "(draft) A " + scenario + " team plans its next period with the data below.\n" + lp;
      }
      case PromptId::kSelfCriticism: {
        const auto description = between(r.prompt, "Generated Problem Description:\n", "\n\nAnalysis Steps:");
        if (description.find("(draft)") != std::string::npos) {
          return "Incomplete Instance:\n- the description is still marked as a draft";
        }
        return "\"Complete Instance\"";
      }
      case PromptId::kSelfRefinement: {
        if (r.prompt.find("First, check the criticism result:\nComplete Instance") != std::string::npos) {
          return "Nothing need to refine";
        }
        return "A planning team must choose its decisions so that the model below holds exactly.\n" + lp;
      }
      case PromptId::kAutoformulation:
        return formulate(lp, r.sample, true);
      case PromptId::kFormatRepair:
        return formulate(lp, r.sample, false);
      case PromptId::kAugmentation: {
        const auto rule = between(r.prompt, "# Augmentation Rule\n", "\n# Augmented Problem");
        if (draw(lp, "empty" + rule + std::to_string(r.sample)) < options_.empty_rate) return "";
        return "Following the rule \"" + rule.substr(0, 40) + "\" the revised problem is stated below.\n" + lp;
      }
      default:
        return "{}";
    }
  }

 private:
  std::string formulate(const std::string& lp, int sample, bool first) const {
    if (lp.empty()) return "I could not find a problem in the question.";
    if (draw(lp, "unrepairable") < options_.unrepairable_rate) {
      return "Formulation:\n" + lp + "```json\n{\"model\": {\"name\": \"broken\"\n```";
    }
    if (first && draw(lp, "garble") < options_.garble_rate) {
      return "Formulation:\n" + lp + "```json\n{\"model\": {\"name\": \n```";
    }
    auto pd = parse_lp(lp);
    const bool mismatch = draw(lp, "mismatch") < options_.mismatch_rate;
    const bool disagree = sample != 0 && draw(lp, "disagree") < options_.disagree_rate;
    if (mismatch || disagree) {
      pd.objective = pd.objective.scaled(2.0).add(Term::constant(1.0));
    }
    nlohmann::json doc = {{"model", to_json(pd)}};
    return "Formulation:\n" + render_math(pd) + "\n```json\n" + doc.dump(1) + "\n```\n";
  }

  SimLlmOptions options_;
  mutable std::mutex mutex_;
  std::map<PromptId, int> calls_;
};

}  // namespace optsynth::testing
