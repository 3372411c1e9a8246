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

// Blind byte-level mutation and the coverage-guided corpus.

#ifndef VERIFUZZ_MUTATOR_H_
#define VERIFUZZ_MUTATOR_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace verifuzz::mutator {

enum class MutationOp {
  kBitFlip,
  kByteOverwrite,
  kByteInsert,
  kByteDelete,
  kBlockDuplicate,
  kBlockDelete,
  kDictionarySplice,
};

inline constexpr int kMinOps = 1;
inline constexpr int kMaxOps = 4;

// Upper bound on the length of MutateBytes(input, ...).
constexpr size_t MaxMutatedLength(size_t input_length) {
  return 2 * (input_length > 64 ? input_length : 64) + 64;
}

// Applies kMinOps..kMaxOps random operators to `input`. Deterministic in
// (input, dictionary, seed). An empty input becomes either a dictionary
// entry or 1..4 random bytes. `forced_ops` overrides the operator count and
// exists for tests; zero returns the input unchanged.
std::string MutateBytes(std::string_view input,
                        std::span<const std::string> dictionary, uint64_t seed,
                        std::optional<int> forced_ops = std::nullopt);

struct CorpusEntry {
  std::string data;
  // ContentHash() of `data`.
  std::string hash;
  // Seconds since the campaign time origin.
  double discovered_at = 0;
  // True when the entry was accepted for new coverage rather than seeded.
  bool coverage_novel = false;
};

// Append-only set of inputs, unique by content hash. Single writer.
class Corpus {
 public:
  explicit Corpus(std::vector<std::string> dictionary = {});

  // Accepts `input` iff new_counters > 0 and its content is not present.
  bool AddIfNovel(std::string input, size_t new_counters, double t);
  // Adds an initial entry regardless of coverage; false on duplicates.
  bool AddSeed(std::string input, double t);

  bool Contains(std::string_view data) const;
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<CorpusEntry>& entries() const { return entries_; }
  const std::vector<std::string>& dictionary() const { return dictionary_; }

 private:
  bool Add(std::string input, double t, bool novel);

  std::vector<std::string> dictionary_;
  std::vector<CorpusEntry> entries_;
  std::set<std::string> hashes_;
};

}  // namespace verifuzz::mutator

#endif  // VERIFUZZ_MUTATOR_H_
