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

// Running a target verifier on one input: process control, outcome
// classification, stack trace parsing and coverage file ingestion.

#ifndef VERIFUZZ_RUNNER_H_
#define VERIFUZZ_RUNNER_H_

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace verifuzz::runner {

inline constexpr std::string_view kInputPlaceholder = "{input}";
inline constexpr size_t kMaxStreamBytes = size_t{1} << 20;
inline constexpr int kKillGraceMs = 500;

struct TargetSpec {
  // argv template; exactly one element contains kInputPlaceholder.
  std::vector<std::string> command;
  double timeout_seconds = 10;
  std::set<int> crash_exit_codes = {70, 101, 134};
  // Environment variable through which the target is told where to write
  // coverage. Empty disables coverage collection.
  std::string coverage_env = "AVALANCHE_COV";
  // Appended to the command, e.g. a flag that skips an expensive backend.
  std::vector<std::string> skip_backend_args;
  // Arguments that make the target print its version, if it has any.
  std::vector<std::string> version_args;
  // File name of the input inside the per-run directory.
  std::string input_name = "input.pvl";
  // Address space limit for the target in MiB; 0 means unlimited.
  uint64_t memory_limit_mb = 0;

  absl::Status Validate() const;
};

// Splits a shell-style command line ("toy-verifier --bugs all {input}")
// into words. Single quotes, double quotes and backslashes group and escape
// as in a POSIX shell; nothing is expanded.
absl::StatusOr<std::vector<std::string>> SplitCommandLine(
    std::string_view command);

struct ExitStatus {
  enum class Kind { kCode, kSignal, kTimeout };
  Kind kind = Kind::kCode;
  int value = 0;  // Exit code or signal number.

  static ExitStatus Code(int code) { return {Kind::kCode, code}; }
  static ExitStatus Signal(int sig) { return {Kind::kSignal, sig}; }
  static ExitStatus Timeout() { return {Kind::kTimeout, 0}; }
  bool operator==(const ExitStatus&) const = default;
};

// "code 1", "signal 11" or "timeout".
std::string DescribeExit(const ExitStatus& exit);

enum class Classification {
  kVerified,
  kCleanError,
  kCrash,
  kTimeout,
  kResourceLimit,
};

// "verified", "clean_error", "crash", "timeout", "resource_limit".
std::string_view ClassificationName(Classification c);
std::optional<Classification> ParseClassification(std::string_view name);

struct StackFrame {
  std::string class_name;
  std::string method_name;
  std::optional<std::string> file_name;
  std::optional<int> line;

  bool operator==(const StackFrame&) const = default;
};

struct StackTrace {
  std::string exception_name;
  std::optional<std::string> message;
  // Frames of the first block followed by those of its "Caused by" blocks.
  std::vector<StackFrame> frames;

  bool operator==(const StackTrace&) const = default;
};

// Finds the first trace block in `text`: a header `<Exception>(: msg)?`,
// optionally prefixed with `Exception in thread "<name>" `, followed by at
// least one `at <Class>.<method>(<File>:<line>)` or
// `at <Class>.<method>(Unknown Source)` line.
std::optional<StackTrace> ParseStackTrace(std::string_view text);

// Header plus one tab-indented `at` line per frame. Reparses to `trace`.
std::string RenderStackTrace(const StackTrace& trace);

struct RunOutcome {
  ExitStatus exit;
  std::string stdout_text;
  std::string stderr_text;
  bool stdout_truncated = false;
  bool stderr_truncated = false;
  int64_t duration_ms = 0;
  Classification classification = Classification::kVerified;
  std::optional<StackTrace> trace;
  // Counter ids written by the target for this run.
  std::set<uint64_t> coverage;
  // Ids not covered before this run; filled in by the campaign.
  size_t new_counters = 0;
};

// Timeout beats resource limits, which beat crashes, which beat clean
// errors. Resource limits are SIGXCPU and SIGXFSZ terminations.
Classification Classify(const ExitStatus& exit, std::string_view stderr_text,
                        const TargetSpec& spec);

// Runs the target on `input` in a fresh temporary directory under
// `work_dir` (the system temp directory when empty). The target runs in its
// own process group, which is killed before returning. Fails only on
// configuration problems such as a missing binary.
absl::StatusOr<RunOutcome> RunOnce(const TargetSpec& spec,
                                   std::string_view input,
                                   const std::string& work_dir = "");

// First line of the target's version output, or "unknown".
std::string ProbeVersion(const TargetSpec& spec);

// Reads one decimal id per line. A missing file yields an empty set; each
// malformed line is skipped with a logged warning and counted in
// `warnings`.
std::set<uint64_t> ReadCoverageFile(const std::string& path,
                                    int* warnings = nullptr);

}  // namespace verifuzz::runner

#endif  // VERIFUZZ_RUNNER_H_
