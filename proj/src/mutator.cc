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

#include "verifuzz/mutator.h"

#include <algorithm>
#include <utility>

#include "verifuzz/hashing.h"
#include "verifuzz/rng.h"

namespace verifuzz::mutator {
namespace {

constexpr size_t kMaxBlock = 64;
constexpr uint64_t kMaxFreshBytes = 4;

std::string FreshInput(std::span<const std::string> dictionary, Rng& rng) {
  if (!dictionary.empty() && rng.Coin()) {
    return dictionary[rng.Below(dictionary.size())];
  }
  std::string out(rng.Range(1, kMaxFreshBytes), '\0');
  for (char& c : out) c = static_cast<char>(rng.Below(256));
  return out;
}

// Block [start, start + length) inside `data`, which must be non-empty.
std::pair<size_t, size_t> RandomBlock(const std::string& data, Rng& rng) {
  size_t length = rng.Range(1, std::min(data.size(), kMaxBlock));
  size_t start = rng.Below(data.size() - length + 1);
  return {start, length};
}

void Apply(MutationOp op, std::string& data,
           std::span<const std::string> dictionary, Rng& rng) {
  // Operators that need bytes to work on degrade to insertion.
  if (data.empty() && op != MutationOp::kDictionarySplice) {
    op = MutationOp::kByteInsert;
  }
  if (dictionary.empty() && op == MutationOp::kDictionarySplice) {
    op = MutationOp::kByteInsert;
  }
  switch (op) {
    case MutationOp::kBitFlip:
      data[rng.Below(data.size())] ^= static_cast<char>(1u << rng.Below(8));
      break;
    case MutationOp::kByteOverwrite:
      data[rng.Below(data.size())] = static_cast<char>(rng.Below(256));
      break;
    case MutationOp::kByteInsert:
      data.insert(data.begin() + rng.Below(data.size() + 1),
                  static_cast<char>(rng.Below(256)));
      break;
    case MutationOp::kByteDelete:
      data.erase(rng.Below(data.size()), 1);
      break;
    case MutationOp::kBlockDuplicate: {
      auto [start, length] = RandomBlock(data, rng);
      std::string block = data.substr(start, length);
      data.insert(rng.Below(data.size() + 1), block);
      break;
    }
    case MutationOp::kBlockDelete: {
      auto [start, length] = RandomBlock(data, rng);
      data.erase(start, length);
      break;
    }
    case MutationOp::kDictionarySplice: {
      const std::string& word = dictionary[rng.Below(dictionary.size())];
      data.insert(rng.Below(data.size() + 1), word);
      break;
    }
  }
}

}  // namespace

std::string MutateBytes(std::string_view input,
                        std::span<const std::string> dictionary, uint64_t seed,
                        std::optional<int> forced_ops) {
  Rng rng(seed);
  if (forced_ops && *forced_ops == 0) return std::string(input);
  if (input.empty()) return FreshInput(dictionary, rng);
  const int ops = forced_ops ? *forced_ops : rng.Range(kMinOps, kMaxOps);
  const size_t limit = MaxMutatedLength(input.size());
  std::string data(input);
  for (int i = 0; i < ops; ++i) {
    auto op = static_cast<MutationOp>(
        rng.Below(static_cast<uint64_t>(MutationOp::kDictionarySplice) + 1));
    Apply(op, data, dictionary, rng);
    if (data.size() > limit) data.resize(limit);
  }
  return data;
}

Corpus::Corpus(std::vector<std::string> dictionary)
    : dictionary_(std::move(dictionary)) {}

bool Corpus::AddIfNovel(std::string input, size_t new_counters, double t) {
  if (new_counters == 0) return false;
  return Add(std::move(input), t, /*novel=*/true);
}

bool Corpus::AddSeed(std::string input, double t) {
  return Add(std::move(input), t, /*novel=*/false);
}

bool Corpus::Contains(std::string_view data) const {
  return hashes_.count(ContentHash(data)) > 0;
}

bool Corpus::Add(std::string input, double t, bool novel) {
  std::string hash = ContentHash(input);
  if (!hashes_.insert(hash).second) return false;
  entries_.push_back({std::move(input), std::move(hash), t, novel});
  return true;
}

}  // namespace verifuzz::mutator
