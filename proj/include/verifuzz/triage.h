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

#ifndef VERIFUZZ_TRIAGE_H_
#define VERIFUZZ_TRIAGE_H_

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"
#include "verifuzz/runner.h"

namespace verifuzz::triage {

// Seed of the bucket hash fold. Part of the on-disk format: stores written
// with a different seed are not comparable.
inline constexpr uint64_t kBucketHashSeed = 0x7a1a6e5eedb0c4e7ULL;
// Separate domain for crashes without a parseable trace.
inline constexpr uint64_t kFallbackHashSeed = 0xfa11bac4fa11bac4ULL;

// Hash of one (class, method, file-or-empty, line-or-0) tuple.
uint64_t FrameHash(const runner::StackFrame& frame);

// Folds the frame hashes of `trace` in order, starting from
// kBucketHashSeed. The exception name does not participate. `top_k` limits
// hashing to the first (innermost) `top_k` frames; 0 hashes all of them.
uint64_t BucketHash(const runner::StackTrace& trace, size_t top_k = 0);

// BucketHash of a trace without frames.
uint64_t EmptyTraceHash();

// Key for crashes without frames: exit status plus a digest of the first
// non-empty stderr line.
uint64_t FallbackHash(const runner::ExitStatus& exit,
                      std::string_view stderr_text);

// BucketHash when the outcome carries frames, FallbackHash otherwise.
uint64_t BucketKey(const runner::RunOutcome& outcome, size_t top_k = 0);

enum class TriageState { kNew, kConfirmed, kDuplicate, kWontfix };

std::string_view TriageStateName(TriageState state);
std::optional<TriageState> ParseTriageState(std::string_view name);

struct TargetVersion {
  std::string command;
  std::string version;
  std::string framework;
};

// Context recorded with a crash.
struct CrashMeta {
  std::string strategy;
  uint64_t seed = 0;
  // Milliseconds since the Unix epoch.
  int64_t timestamp_ms = 0;
  TargetVersion target_version;
};

struct CrashBucket {
  std::string hash;  // HexU64 of the bucket key.
  std::string exception_name;
  bool fallback = false;
  runner::StackTrace trace;
  int64_t hit_count = 0;
  int64_t first_seen_ms = 0;
  int64_t last_seen_ms = 0;
  TriageState triage_state = TriageState::kNew;
  std::string strategy_first;
};

struct CrashReport {
  CrashBucket bucket;
  std::string input;
  std::string stderr_text;
  runner::ExitStatus exit;
  std::string strategy;
  uint64_t seed = 0;
  TargetVersion target_version;
  // "unreplayed", "stable" or "flaky".
  std::string replay_status = "unreplayed";
};

struct ReplayResult {
  int runs = 0;
  int matches = 0;
  bool stable = false;
};

// Minimum number of matching replays out of five for a stable crash.
inline constexpr int kReplayRuns = 5;
inline constexpr int kReplayMatches = 4;

// Crash buckets of one campaign, kept under `<dir>/<hash>/`:
//   input.bin    representative input
//   trace.txt    full stderr of the first crash
//   report.json  CrashReport
//   bucket.json  mutable bucket state (hits, last seen, triage state)
//   triage.log   one line per triage state change
// Thread-safe; every method observes a consistent snapshot.
class CrashStore {
 public:
  // Loads existing buckets from `dir`, creating it if needed.
  static absl::StatusOr<std::unique_ptr<CrashStore>> Open(std::string dir);

  // Files the crash. Returns the bucket and whether it is new. Only a new
  // bucket writes input, trace and report; a repeat updates bucket.json.
  absl::StatusOr<std::pair<CrashBucket, bool>> Record(
      const runner::RunOutcome& outcome, std::string_view input,
      const CrashMeta& meta, size_t top_k = 0);

  // Sets the state and appends to triage.log, even when unchanged.
  absl::StatusOr<CrashBucket> SetTriageState(std::string_view hash,
                                             TriageState state, int64_t now_ms);

  std::optional<CrashBucket> Get(std::string_view hash) const;
  // Ordered by first sighting, then hash.
  std::vector<CrashBucket> List() const;
  size_t size() const;

  absl::StatusOr<CrashReport> LoadReport(std::string_view hash) const;
  absl::StatusOr<std::string> LoadInput(std::string_view hash) const;

  // Replays the representative input kReplayRuns times and records
  // "stable" or "flaky" in the report.
  absl::StatusOr<ReplayResult> Replay(std::string_view hash,
                                      const runner::TargetSpec& spec,
                                      size_t top_k = 0);

  // Checks that every bucket directory's stored trace hashes to its name
  // and that the directory set matches the loaded buckets.
  absl::Status Audit() const;

  const std::string& dir() const { return dir_; }
  std::string BucketDir(std::string_view hash) const;

 private:
  explicit CrashStore(std::string dir) : dir_(std::move(dir)) {}
  absl::Status Load();
  absl::Status WriteBucketState(const CrashBucket& bucket) const;

  std::string dir_;
  mutable std::mutex mu_;
  std::vector<CrashBucket> buckets_;
};

// JSON forms shared by the store, the service and the CLI.
nlohmann::json TraceToJson(const runner::StackTrace& trace);
nlohmann::json BucketToJson(const CrashBucket& bucket);
nlohmann::json ReportToJson(const CrashReport& report);

}  // namespace verifuzz::triage

#endif  // VERIFUZZ_TRIAGE_H_
