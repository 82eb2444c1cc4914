// Copyright 2026 The classim Authors.
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
#include <random>
#include <string_view>

namespace classim {

/// Stable 64-bit FNV-1a over the bytes of `text`. Identical on every platform.
std::uint64_t hash_string(std::string_view text);

/// Combines two 64-bit values through a splitmix64 finalizer.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Per-stage or per-item seed: mix_seed(base, hash_string(tag)).
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag);

// Random source with platform-independent draws. The engine is the standard
// mt19937_64; the mapping to uniform reals and integers is done here because
// the std:: distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  /// Exponential variate with the given rate (events per unit time).
  double exponential(double rate);

  /// Standard normal variate (Box-Muller, one value per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace classim
