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

// The toy verifier: a phase-structured mini-PVL checker (lex, parse,
// resolve, typecheck, encode) with eight individually switchable seeded
// bugs. It is the fuzzing target used by the tests and the acceptance
// experiments. Crashes are reported as managed-runtime style stack traces.

#ifndef VERIFUZZ_TOY_VERIFIER_H_
#define VERIFUZZ_TOY_VERIFIER_H_

#include <bitset>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "verifuzz/grammar.h"

namespace verifuzz::toy {

inline constexpr int kBugCount = 8;

// Seeded bugs. Bit i of BugToggles enables bug B(i+1).
enum class Bug {
  kEmptyEnum = 0,      // B1
  kUnderscoreName,     // B2
  kLabelInRunBlock,    // B3
  kOldInPrecondition,  // B4
  kLockNull,           // B5
  kForkNull,           // B6
  kNumericSuffix,      // B7
  kEmptySequential,    // B8
};

using BugToggles = std::bitset<kBugCount>;

// "B1" .. "B8".
std::string BugName(Bug bug);

// Parses a comma-separated list such as "B1,B3". Whitespace around names is
// ignored, the empty string enables nothing and "all" enables every bug.
// Unknown names are an error.
absl::StatusOr<BugToggles> ParseBugList(std::string_view list);

// A minimal program that makes `bug` crash when it is enabled and is
// accepted or cleanly rejected otherwise.
std::string_view CanonicalTrigger(Bug bug);

enum class Phase { kLex, kParse, kResolve, kTypecheck, kEncode };

// "lex", "parse", "resolve", "typecheck" or "encode".
std::string_view PhaseName(Phase phase);

struct TraceFrame {
  std::string class_name;
  std::string method_name;
  std::string file_name;
  int line = 0;
};

struct CrashInfo {
  Bug bug = Bug::kEmptyEnum;
  std::string exception;
  std::string message;
  // Innermost frame first.
  std::vector<TraceFrame> frames;

  // `Exception in thread "main" <exception>: <message>` followed by one
  // tab-indented `at` line per frame.
  std::string Render() const;
};

struct CheckResult {
  enum class Outcome { kVerified, kDiagnostic, kCrash };

  Outcome outcome = Outcome::kVerified;
  // Last phase entered.
  Phase phase = Phase::kLex;
  // `error: <phase>: <message> at <line>:<col>`, without newline.
  std::string diagnostic;
  std::optional<CrashInfo> crash;
  // Coverage counter ids hit during the check.
  std::set<uint32_t> counters;

  // 0, 1 or 70.
  int ExitCode() const;
  std::string StdoutText() const;
  std::string StderrText() const;
};

// Runs every phase in order. Thread-compatible: concurrent calls are fine.
CheckResult Check(std::string_view text, const BugToggles& bugs);

// Deepest phase entered when checking `text` with every bug disabled.
Phase PhaseReached(std::string_view text);

// Coverage counter ids. Phase entries use 1..5, success 6; per node kind
// handlers use a base plus the NodeKind value; diagnostics and bug sites
// use a base plus their code.
inline constexpr uint32_t kCounterSuccess = 6;
inline constexpr uint32_t kCounterBuildBase = 100;
inline constexpr uint32_t kCounterResolveBase = 200;
inline constexpr uint32_t kCounterTypecheckBase = 300;
inline constexpr uint32_t kCounterEncodeBase = 400;
inline constexpr uint32_t kCounterDiagnosticBase = 500;
inline constexpr uint32_t kCounterBugBase = 600;

uint32_t PhaseCounter(Phase phase);

struct CounterInfo {
  uint32_t id;
  std::string name;
};

// Every counter id the verifier can emit, in increasing id order.
std::vector<CounterInfo> CounterTable();

// The shipped mini-PVL grammar, compiled into the binary.
std::string_view MiniPvlGrammarText();
const grammar::Grammar& MiniPvlGrammar();
const grammar::Parser& MiniPvlParser();

}  // namespace verifuzz::toy

#endif  // VERIFUZZ_TOY_VERIFIER_H_
