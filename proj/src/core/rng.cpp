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

#include "crowdmimic/core/rng.hpp"

#include <cmath>

namespace crowdmimic {
namespace {

// splitmix64 output function.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

}  // namespace

Rng::Rng(std::uint64_t seed) : id_(mix64(seed + kGamma)), state_(id_) {}

Rng Rng::fork(std::string_view name) const {
  return Rng(id_ ^ fnv1a(name));
}

Rng Rng::fork(std::uint64_t index) const {
  return Rng(id_ ^ mix64(index + 0x517CC1B727220A95ull));
}

std::uint64_t Rng::next_u64() {
  state_ += kGamma;
  return mix64(state_);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

std::int64_t Rng::uniform_int(std::int64_t n) {
  // Rejection-free modulo is biased for huge n; all our n are tiny.
  return static_cast<std::int64_t>(next_u64() % static_cast<std::uint64_t>(n));
}

double Rng::normal() {
  double u1 = 1.0 - uniform();  // (0, 1]
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

int Rng::poisson(double mean) {
  double limit = std::exp(-mean);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform();
  } while (p > limit);
  return k - 1;
}

}  // namespace crowdmimic
