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

// Seeded random streams with a fixed, documented algorithm.
//
// The stream is SplitMix64. Integer draws use rejection sampling over the
// next 64-bit word; real draws take the top 53 bits. Sub-seeds for batch
// item i are mix64(master + (i + 1) * 0x9E3779B97F4A7C15).

#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace optsynth {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z);
std::uint64_t sub_seed(std::uint64_t master, std::size_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  // Uniform over [low, high], both inclusive. Requires low <= high.
  std::int64_t uniform_int(std::int64_t low, std::int64_t high);
  // Uniform over [low, high).
  double uniform_real(double low, double high);
  // Uniform over [0, n).
  std::size_t index(std::size_t n);
  bool bernoulli(double p);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace optsynth
