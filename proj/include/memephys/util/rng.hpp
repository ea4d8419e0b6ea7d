// Copyright (c) 2026 The memephys Authors. All Rights Reserved.
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

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace memephys {

/// xoshiro256** 1.0 seeded through splitmix64. All randomness in the toolkit
/// goes through this generator so fixtures are portable across platforms
/// and standard libraries (std:: distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Child stream for a named purpose ("synth/eeg", "train/init", ...).
  /// Derivation: seed' = splitmix64(seed ^ fnv1a64(label)).
  Rng derive(std::string_view label) const;
  Rng derive(std::string_view label, std::uint64_t index) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer on [0, n).
  std::uint64_t uniform_index(std::uint64_t n);
  /// Standard normal via Box-Muller; values are produced in pairs.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Marsaglia-Tsang gamma(shape, scale).
  double gamma(double shape, double scale);
  /// Poisson(lambda): multiplication method below 10, PTRS above.
  std::uint64_t poisson(double lambda);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
  std::optional<double> spare_normal_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);

}  // namespace memephys
