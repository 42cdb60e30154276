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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace optsynth {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A ProblemData instance breaks a structural invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed text input. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(format(message, line, column)), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  static std::string format(const std::string& message, std::size_t line,
                            std::size_t column) {
    if (line == 0) return message;
    return "line " + std::to_string(line) + ", column " +
           std::to_string(column) + ": " + message;
  }

  std::size_t line_;
  std::size_t column_;
};

// Bad user configuration (unknown parameter, value out of range, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Requested operation is outside what a component supports.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// The model contains a construct the target format cannot express.
class UnsupportedConstructError : public Error {
 public:
  using Error::Error;
};

// A generator kept producing degenerate draws.
class GenerationError : public Error {
 public:
  using Error::Error;
};

// Transport, rate-limit or fixture lookup failure in the model gateway.
class GatewayError : public Error {
 public:
  using Error::Error;
};

}  // namespace optsynth
