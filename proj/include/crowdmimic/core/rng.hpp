// Copyright 2026 The Crowdmimic Authors
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

#include <cstdint>
#include <string_view>
#include <vector>

namespace crowdmimic {

/// Seeded random stream with deterministic named sub-streams. Every run
/// draws all of its randomness from one root seed; sub-streams are derived
/// from the stream identity (not from its draw position), so forking is
/// insensitive to how many values were consumed. All distributions are
/// implemented on top of raw 64-bit draws to keep output identical across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Child stream derived from this stream's identity and a label.
  Rng fork(std::string_view name) const;
  Rng fork(std::uint64_t index) const;

  std::uint64_t next_u64();

  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n); n must be positive.
  std::int64_t uniform_int(std::int64_t n);
  /// Standard normal via Box-Muller (two uniforms per draw, no caching).
  double normal();
  /// Poisson-distributed count (Knuth multiplication method).
  int poisson(double mean);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::int64_t i = static_cast<std::int64_t>(v.size()) - 1; i > 0; --i) {
      std::int64_t j = uniform_int(i + 1);
      std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
    }
  }

 private:
  std::uint64_t id_;
  std::uint64_t state_;
};

}  // namespace crowdmimic
