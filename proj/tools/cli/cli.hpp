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

// Command-line front end. Every subcommand prints a JSON summary on `out`
// and a short table on `err`. Exit codes: 0 ok, 1 stage failure, 2 usage or
// configuration error.

#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace optsynth::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitStageFailure = 1;
inline constexpr int kExitUsage = 2;

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Reads the process environment.
EnvLookup process_env();

// Environment variable consulted for a setting: OPTSYNTH_ + upper-case key
// with '.' and '-' replaced by '_'.
std::string env_name(const std::string& key);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const EnvLookup& env = process_env());

}  // namespace optsynth::cli
