// Copyright 2026 The protodisc Authors
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
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace protodisc {

// Deterministic random source.
//
// Algorithm: xoshiro256** (Blackman & Vigna), state filled from a SplitMix64
// sequence. Every stochastic step in the engine draws from its own stream,
// derived from the run seed and a stream name via `Rng::stream`, so adding a
// draw in one component never shifts the values another component sees.
//
// Only integer ops and IEEE-754 double arithmetic are used; std::*_distribution
// is avoided because its output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent stream for (seed, name). The name is hashed with FNV-1a and
  // mixed into the seed through SplitMix64.
  static Rng stream(std::uint64_t seed, std::string_view name);

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53 random mantissa bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::size_t index(std::size_t n);

  // Standard normal via Box-Muller; the second variate is cached.
  double normal();

 private:
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace protodisc
