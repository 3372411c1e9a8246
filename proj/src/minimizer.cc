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

#include "verifuzz/minimizer.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <utility>

#include "absl/strings/str_cat.h"
#include "verifuzz/hashing.h"

namespace verifuzz::minimizer {
namespace {

namespace fs = std::filesystem;

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string Join(const std::vector<std::string>& units) {
  std::string out;
  for (const std::string& u : units) out += u;
  return out;
}

// Attaches each run of whitespace to the token before it.
std::vector<std::string> AttachWhitespace(
    std::string_view input, const std::vector<std::string>& tokens) {
  std::vector<std::string> units;
  size_t pos = 0;
  size_t lead = 0;
  while (lead < input.size() && IsSpace(input[lead])) ++lead;
  if (lead > 0) units.emplace_back(input.substr(0, lead));
  pos = lead;
  for (const std::string& token : tokens) {
    // Tokens are consecutive non-space runs of the input.
    std::string unit = token;
    pos += token.size();
    size_t end = pos;
    while (end < input.size() && IsSpace(input[end])) ++end;
    unit.append(input.substr(pos, end - pos));
    pos = end;
    units.push_back(std::move(unit));
  }
  if (pos < input.size()) units.emplace_back(input.substr(pos));
  return units;
}

class Evaluator {
 public:
  Evaluator(const Predicate& predicate, size_t budget)
      : predicate_(predicate), budget_(budget) {}

  // Returns nullopt once the budget is exhausted.
  std::optional<bool> Test(const std::string& candidate) {
    auto it = cache_.find(candidate);
    if (it != cache_.end()) {
      ++hits_;
      return it->second;
    }
    if (evaluations_ >= budget_) return std::nullopt;
    ++evaluations_;
    bool result = predicate_(candidate);
    cache_.emplace(candidate, result);
    return result;
  }

  size_t evaluations() const { return evaluations_; }
  size_t hits() const { return hits_; }

 private:
  const Predicate& predicate_;
  size_t budget_;
  size_t evaluations_ = 0;
  size_t hits_ = 0;
  std::map<std::string, bool> cache_;
};

std::vector<std::string> Slice(const std::vector<std::string>& units,
                               size_t begin, size_t end) {
  return std::vector<std::string>(units.begin() + begin, units.begin() + end);
}

std::vector<std::string> Without(const std::vector<std::string>& units,
                                 size_t begin, size_t end) {
  std::vector<std::string> out(units.begin(), units.begin() + begin);
  out.insert(out.end(), units.begin() + end, units.end());
  return out;
}

// Classic ddmin over `units`. Returns false when the budget ran out; on
// success the result is 1-minimal with respect to `units`' granularity.
bool DeltaDebug(std::vector<std::string>& units, Evaluator& eval) {
  size_t n = 2;
  while (units.size() >= 2) {
    n = std::min(n, units.size());
    std::vector<size_t> bounds;
    for (size_t i = 0; i <= n; ++i) bounds.push_back(i * units.size() / n);
    bool reduced = false;
    for (size_t i = 0; i < n && !reduced; ++i) {
      std::vector<std::string> subset = Slice(units, bounds[i], bounds[i + 1]);
      std::optional<bool> ok = eval.Test(Join(subset));
      if (!ok) return false;
      if (*ok) {
        units = std::move(subset);
        n = 2;
        reduced = true;
      }
    }
    for (size_t i = 0; i < n && !reduced; ++i) {
      std::vector<std::string> complement =
          Without(units, bounds[i], bounds[i + 1]);
      std::optional<bool> ok = eval.Test(Join(complement));
      if (!ok) return false;
      if (*ok) {
        units = std::move(complement);
        n = std::max<size_t>(n - 1, 2);
        reduced = true;
      }
    }
    if (reduced) continue;
    if (n >= units.size()) break;
    n = std::min(2 * n, units.size());
  }
  if (units.size() == 1) {
    std::optional<bool> ok = eval.Test("");
    if (!ok) return false;
    if (*ok) units.clear();
  }
  return true;
}

}  // namespace

std::string_view GranularityName(Granularity granularity) {
  switch (granularity) {
    case Granularity::kLine:
      return "line";
    case Granularity::kToken:
      return "token";
    case Granularity::kChar:
      return "char";
  }
  return "token";
}

std::optional<Granularity> ParseGranularity(std::string_view name) {
  for (auto g : {Granularity::kLine, Granularity::kToken, Granularity::kChar}) {
    if (GranularityName(g) == name) return g;
  }
  return std::nullopt;
}

std::vector<std::string> SplitUnits(std::string_view input,
                                    Granularity granularity,
                                    const grammar::Grammar* grammar) {
  std::vector<std::string> units;
  switch (granularity) {
    case Granularity::kLine: {
      size_t start = 0;
      while (start < input.size()) {
        size_t end = input.find('\n', start);
        end = end == std::string_view::npos ? input.size() : end + 1;
        units.emplace_back(input.substr(start, end - start));
        start = end;
      }
      return units;
    }
    case Granularity::kToken: {
      std::vector<std::string> tokens;
      if (grammar != nullptr) {
        tokens = grammar::TokenizeLenient(*grammar, input);
      } else {
        size_t pos = 0;
        while (pos < input.size()) {
          while (pos < input.size() && IsSpace(input[pos])) ++pos;
          size_t end = pos;
          while (end < input.size() && !IsSpace(input[end])) ++end;
          if (end > pos) tokens.emplace_back(input.substr(pos, end - pos));
          pos = end;
        }
      }
      return AttachWhitespace(input, tokens);
    }
    case Granularity::kChar:
      for (char c : input) units.emplace_back(1, c);
      return units;
  }
  return units;
}

nlohmann::json ResultToJson(const MinimizeResult& result,
                            Granularity granularity) {
  return {{"granularity", std::string(GranularityName(granularity))},
          {"evaluations", result.evaluations},
          {"cache_hits", result.cache_hits},
          {"size_before", result.size_before},
          {"size_after", result.output.size()},
          {"minimal", result.minimal},
          {"stable", result.stable}};
}

absl::StatusOr<MinimizeResult> Minimize(std::string input,
                                        const Predicate& predicate,
                                        const MinimizeOptions& options) {
  if (options.max_evaluations <= kConfirmationRuns) {
    return absl::InvalidArgumentError("evaluation budget too small");
  }
  MinimizeResult result;
  result.size_before = input.size();
  Evaluator eval(predicate, options.max_evaluations - kConfirmationRuns);
  std::optional<bool> original = eval.Test(input);
  if (!original.value_or(false)) {
    return absl::InvalidArgumentError("predicate does not hold on the input");
  }

  std::string current = std::move(input);
  bool within_budget = true;
  std::optional<bool> empty = eval.Test("");
  if (!empty) {
    within_budget = false;
  } else if (*empty) {
    current.clear();
  }
  for (auto level :
       {Granularity::kLine, Granularity::kToken, Granularity::kChar}) {
    if (!within_budget || current.empty()) break;
    const bool last = level == options.granularity;
    // At the final level repeat until a pass removes nothing, so the result
    // is 1-minimal over its own re-split units.
    while (within_budget) {
      std::vector<std::string> units =
          SplitUnits(current, level, options.grammar);
      size_t before = units.size();
      within_budget = DeltaDebug(units, eval);
      std::string next = Join(units);
      bool progressed = units.size() < before;
      current = std::move(next);
      if (!last || !progressed) break;
    }
    if (last) break;
  }
  result.minimal = within_budget;
  result.output = std::move(current);

  int confirmed = 0;
  for (int i = 0; i < kConfirmationRuns; ++i)
    confirmed += predicate(result.output);
  result.stable = confirmed == kConfirmationRuns;
  result.evaluations = eval.evaluations() + kConfirmationRuns;
  result.cache_hits = eval.hits();
  return result;
}

Predicate BucketPredicate(const runner::TargetSpec& spec, std::string hash,
                          size_t top_k) {
  return [spec, hash = std::move(hash), top_k](std::string_view candidate) {
    absl::StatusOr<runner::RunOutcome> outcome =
        runner::RunOnce(spec, candidate);
    return outcome.ok() &&
           outcome->classification == runner::Classification::kCrash &&
           HexU64(triage::BucketKey(*outcome, top_k)) == hash;
  };
}

absl::StatusOr<MinimizeResult> MinimizeBucket(triage::CrashStore& store,
                                              std::string_view hash,
                                              const runner::TargetSpec& spec,
                                              const MinimizeOptions& options,
                                              size_t top_k) {
  absl::StatusOr<std::string> input = store.LoadInput(hash);
  if (!input.ok()) return input.status();
  absl::StatusOr<MinimizeResult> result =
      Minimize(std::move(*input),
               BucketPredicate(spec, std::string(hash), top_k), options);
  if (!result.ok()) return result.status();
  const fs::path dir = store.BucketDir(hash);
  {
    std::ofstream out(dir / "minimized.bin",
                      std::ios::binary | std::ios::trunc);
    out << result->output;
    if (!out) return absl::InternalError("cannot write minimized.bin");
  }
  std::ofstream meta(dir / "minimize.json", std::ios::trunc);
  meta << ResultToJson(*result, options.granularity).dump(2) << '\n';
  if (!meta) return absl::InternalError("cannot write minimize.json");
  return result;
}

}  // namespace verifuzz::minimizer
