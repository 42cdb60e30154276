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

// Plain-text `key = value` files. Blank lines and lines starting with '#'
// are ignored; keys and values are trimmed. Later keys overwrite earlier ones.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace optsynth {

using KeyValues = std::map<std::string, std::string>;

// Throws ParseError on a line without '='.
KeyValues parse_key_values(std::string_view text);
KeyValues read_key_values(const std::filesystem::path& path);

double kv_number(const KeyValues& kv, const std::string& key, double fallback);

std::string trim(std::string_view s);

}  // namespace optsynth
