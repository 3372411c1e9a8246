// Copyright 2026 The Verifuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VERIFUZZ_RNG_H_
#define VERIFUZZ_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

#include "verifuzz/hashing.h"

namespace verifuzz {

// Seeded random source with platform-independent sampling helpers.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. The std distributions are not, so all bounded sampling goes
// through the helpers below.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }

  // Uniform in [0, bound). `bound` must be positive.
  uint64_t Below(uint64_t bound) {
    // Rejection sampling removes modulo bias.
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  // Uniform in [lo, hi].
  int64_t Range(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(Below(static_cast<uint64_t>(hi - lo) + 1));
  }

  bool Coin() { return (engine_() >> 63) != 0; }

  // True with probability num/den.
  bool Chance(uint64_t num, uint64_t den) { return Below(den) < num; }

  // Number of failures before the first success of a fair coin, capped.
  int Geometric(int cap) {
    int n = 0;
    while (n < cap && Coin()) ++n;
    return n;
  }

  // Index drawn proportionally to `weights` by cumulative-sum inversion.
  // Weights must be positive.
  size_t Weighted(std::span<const uint32_t> weights) {
    uint64_t total = 0;
    for (uint32_t w : weights) total += w;
    uint64_t r = Below(total);
    for (size_t i = 0; i < weights.size(); ++i) {
      if (r < weights[i]) return i;
      r -= weights[i];
    }
    return weights.size() - 1;
  }

  template <typename T>
  const T& Pick(std::span<const T> items) {
    return items[Below(items.size())];
  }

 private:
  std::mt19937_64 engine_;
};

// Derives the seed for worker `worker`, iteration `iteration` of a campaign.
// Stable across worker counts: the result depends only on the triple.
constexpr uint64_t SplitSeed(uint64_t master, uint64_t worker,
                             uint64_t iteration) {
  constexpr uint64_t kSplitDomain = 0x5eed5eed5eed5eedULL;
  return HashCombine(HashCombine(HashCombine(kSplitDomain, master), worker),
                     iteration);
}

}  // namespace verifuzz

#endif  // VERIFUZZ_RNG_H_
