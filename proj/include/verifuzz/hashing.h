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

#ifndef VERIFUZZ_HASHING_H_
#define VERIFUZZ_HASHING_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace verifuzz {

// All persistent identifiers (bucket hashes, corpus file names, derived
// seeds) are built from the functions below. Changing any constant here
// invalidates existing campaign directories.

inline constexpr uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr uint64_t kFnvPrime = 0x100000001b3ULL;
inline constexpr uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

// 64-bit FNV-1a over raw bytes.
constexpr uint64_t Fnv1a64(std::string_view bytes) {
  uint64_t h = kFnvOffsetBasis;
  for (char c : bytes) {
    h ^= static_cast<uint8_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

// SplitMix64 finalizer.
constexpr uint64_t Mix64(uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Order-sensitive fold step.
constexpr uint64_t HashCombine(uint64_t h, uint64_t v) {
  return Mix64(h ^ (v + kGoldenGamma + (h << 6) + (h >> 2)));
}

// Lower-case, zero-padded, 16 hex digits.
std::string HexU64(uint64_t v);

// Parses the output of HexU64. Returns false on malformed input.
bool ParseHexU64(std::string_view text, uint64_t* out);

// Content-addressed name used for corpus entries.
inline std::string ContentHash(std::string_view bytes) {
  return HexU64(Mix64(Fnv1a64(bytes)));
}

}  // namespace verifuzz

#endif  // VERIFUZZ_HASHING_H_
