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

// Canonical JSON document for ProblemData. The same schema is what the
// formulation model is asked to return, so the reader is lenient about
// relation spellings and bare factor names. See docs/model_schema.md.

#pragma once

#include <string>

#include "json.hpp"

#include "optsynth/model.hpp"

namespace optsynth {

nlohmann::json to_json(const ProblemData& pd);
nlohmann::json to_json(const Expression& e);

// Throws ParseError with a JSON-path location on schema violations.
ProblemData problem_from_json(const nlohmann::json& doc);
ProblemData problem_from_json_text(const std::string& text);

std::string to_json_text(const ProblemData& pd, int indent = -1);

}  // namespace optsynth
