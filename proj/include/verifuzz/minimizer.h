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

#ifndef VERIFUZZ_MINIMIZER_H_
#define VERIFUZZ_MINIMIZER_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "verifuzz/grammar.h"
#include "verifuzz/runner.h"
#include "verifuzz/triage.h"

namespace verifuzz::minimizer {

enum class Granularity { kLine, kToken, kChar };

std::string_view GranularityName(Granularity granularity);
std::optional<Granularity> ParseGranularity(std::string_view name);

// Splits `input` into units whose concatenation is `input`. Lines keep their
// newline; tokens keep the whitespace that follows them. Tokens come from
// the grammar's lexer when `grammar` is given, else from whitespace.
std::vector<std::string> SplitUnits(std::string_view input,
                                    Granularity granularity,
                                    const grammar::Grammar* grammar = nullptr);

using Predicate = std::function<bool(std::string_view)>;

inline constexpr size_t kDefaultMaxEvaluations = 2000;
inline constexpr int kConfirmationRuns = 3;

struct MinimizeOptions {
  // Finest granularity; coarser ones run first.
  Granularity granularity = Granularity::kToken;
  const grammar::Grammar* grammar = nullptr;
  // Cap on predicate calls, confirmation runs included.
  size_t max_evaluations = kDefaultMaxEvaluations;
};

struct MinimizeResult {
  std::string output;
  size_t size_before = 0;
  size_t evaluations = 0;
  size_t cache_hits = 0;
  // False when the budget ran out before 1-minimality was established.
  bool minimal = false;
  // True when all confirmation runs still satisfied the predicate.
  bool stable = false;
};

nlohmann::json ResultToJson(const MinimizeResult& result,
                            Granularity granularity);

// Delta debugging. Fails with InvalidArgument when `predicate(input)` is
// false. Candidates are cached by content, so each distinct candidate is
// evaluated once before the final confirmation runs.
absl::StatusOr<MinimizeResult> Minimize(std::string input,
                                        const Predicate& predicate,
                                        const MinimizeOptions& options = {});

// True when running `spec` on the candidate crashes into bucket `hash`.
Predicate BucketPredicate(const runner::TargetSpec& spec, std::string hash,
                          size_t top_k = 0);

// Minimizes a stored bucket's representative input and writes
// minimized.bin and minimize.json next to it.
absl::StatusOr<MinimizeResult> MinimizeBucket(triage::CrashStore& store,
                                              std::string_view hash,
                                              const runner::TargetSpec& spec,
                                              const MinimizeOptions& options,
                                              size_t top_k = 0);

}  // namespace verifuzz::minimizer

#endif  // VERIFUZZ_MINIMIZER_H_
