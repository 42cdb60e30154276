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

// LP text format. The grammar accepted and produced here is documented in
// docs/lp_format.md; emit_lp() output is stable byte for byte.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "optsynth/model.hpp"

namespace optsynth {

enum class NameSanitization { kStrict, kPermissive };

struct LpDialectOptions {
  std::size_t max_line_width = 255;
  bool emit_indicators = true;
  bool emit_quadratics = true;
  NameSanitization name_sanitization = NameSanitization::kPermissive;

  // Throws ConfigError when max_line_width < 64.
  void check() const;
};

// Throws UnsupportedConstructError for general-nonlinear rows, for
// indicator/quadratic rows the options disable, and for names that are
// invalid (strict) or collide after sanitization (permissive).
std::string emit_lp(const ProblemData& pd, const LpDialectOptions& options = {});

// Throws ParseError with line and column.
ProblemData parse_lp(std::string_view text);

// Number of Unicode code points in UTF-8 text.
std::size_t lp_length(std::string_view text);

// Replaces characters outside [A-Za-z0-9_], prefixes a leading digit with
// '_' and suffixes reserved words with '_'. Strict mode throws instead of
// rewriting.
std::string sanitize_name(std::string_view name, NameSanitization mode);

}  // namespace optsynth
