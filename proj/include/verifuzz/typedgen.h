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

// Generation of mini-PVL programs that are scope- and type-correct by
// construction, so that they pass every front-end phase of the toy
// verifier.

#ifndef VERIFUZZ_TYPEDGEN_H_
#define VERIFUZZ_TYPEDGEN_H_

#include <bitset>
#include <cstdint>
#include <string>
#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace verifuzz::typedgen {

enum class Feature {
  kEnums = 0,
  kContracts,  // requires, ensures, context_everywhere, loop_invariant
  kLoops,      // if, while and nested blocks
  kLabels,
  kLocks,
  kForks,      // fork statements and the run blocks they need
  kParBlocks,  // sequential blocks
  kOldExpr,
};

inline constexpr int kFeatureCount = 8;
using FeatureSet = std::bitset<kFeatureCount>;

// "enums", "contracts", "loops", "labels", "locks", "forks", "par_blocks",
// "old_expr".
std::string_view FeatureName(Feature feature);

// Comma-separated feature names; "all" and "none" are accepted.
absl::StatusOr<FeatureSet> ParseFeatures(std::string_view list);
std::string FeaturesToString(const FeatureSet& features);

struct TypedGenConfig {
  uint64_t seed = 0;
  int max_classes = 3;
  int max_methods_per_class = 3;
  int max_stmt_depth = 3;
  FeatureSet features = FeatureSet().set();
  // Also places `\old` in preconditions and statements, which the verifier
  // must reject. Off by default.
  bool illegal_old_placement = false;

  bool Has(Feature f) const { return features.test(static_cast<size_t>(f)); }
};

absl::Status ValidateConfig(const TypedGenConfig& config);

// Deterministic in `config`. With illegal_old_placement off, the output
// passes lexing, parsing, resolution and type checking of the toy verifier
// with every seeded bug disabled.
absl::StatusOr<std::string> GenerateTyped(const TypedGenConfig& config);

// Halves every maximum (rounding down, never below 1); keeps the seed and
// the features.
TypedGenConfig ShrinkConfig(const TypedGenConfig& config);

}  // namespace verifuzz::typedgen

#endif  // VERIFUZZ_TYPEDGEN_H_
