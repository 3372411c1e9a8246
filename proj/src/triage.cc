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

#include "verifuzz/triage.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "glog/logging.h"
#include "verifuzz/hashing.h"

namespace verifuzz::triage {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using runner::ExitStatus;
using runner::StackFrame;
using runner::StackTrace;

uint64_t HashString(std::string_view s) {
  return HashCombine(Fnv1a64(s), s.size());
}

absl::StatusOr<std::string> ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    return absl::NotFoundError(absl::StrCat("cannot read ", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

absl::Status WriteFileAtomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      return absl::InternalError(absl::StrCat("cannot write ", tmp.string()));
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    return absl::InternalError(
        absl::StrCat("cannot rename ", tmp.string(), ": ", ec.message()));
  }
  return absl::OkStatus();
}

absl::Status AppendLine(const fs::path& path, std::string_view line) {
  std::ofstream out(path, std::ios::app);
  out << line << '\n';
  out.flush();
  if (!out)
    return absl::InternalError(absl::StrCat("cannot append ", path.string()));
  return absl::OkStatus();
}

json ExitToJson(const ExitStatus& exit) {
  switch (exit.kind) {
    case ExitStatus::Kind::kCode:
      return {{"kind", "code"}, {"value", exit.value}};
    case ExitStatus::Kind::kSignal:
      return {{"kind", "signal"}, {"value", exit.value}};
    case ExitStatus::Kind::kTimeout:
      return {{"kind", "timeout"}, {"value", 0}};
  }
  return nullptr;
}

ExitStatus ExitFromJson(const json& j) {
  std::string kind = j.value("kind", "code");
  int value = j.value("value", 0);
  if (kind == "signal") return ExitStatus::Signal(value);
  if (kind == "timeout") return ExitStatus::Timeout();
  return ExitStatus::Code(value);
}

StackTrace TraceFromJson(const json& exception, const json& message,
                         const json& frames) {
  StackTrace trace;
  trace.exception_name =
      exception.is_string() ? exception.get<std::string>() : "";
  if (message.is_string()) trace.message = message.get<std::string>();
  for (const json& f : frames) {
    StackFrame frame;
    frame.class_name = f.at("class").get<std::string>();
    frame.method_name = f.at("method").get<std::string>();
    if (f.contains("file") && f["file"].is_string()) {
      frame.file_name = f["file"].get<std::string>();
    }
    if (f.contains("line") && f["line"].is_number_integer()) {
      frame.line = f["line"].get<int>();
    }
    trace.frames.push_back(std::move(frame));
  }
  return trace;
}

CrashBucket BucketFromJson(const json& j, StackTrace trace) {
  CrashBucket bucket;
  bucket.hash = j.at("hash").get<std::string>();
  bucket.exception_name = j.value("exception", "");
  bucket.fallback = j.value("fallback", false);
  bucket.trace = std::move(trace);
  bucket.hit_count = j.value("hit_count", int64_t{1});
  bucket.first_seen_ms = j.value("first_seen_ms", int64_t{0});
  bucket.last_seen_ms = j.value("last_seen_ms", int64_t{0});
  bucket.triage_state = ParseTriageState(j.value("triage_state", "new"))
                            .value_or(TriageState::kNew);
  bucket.strategy_first = j.value("strategy_first", "");
  return bucket;
}

CrashReport ReportFromJson(const json& j) {
  CrashReport report;
  StackTrace trace =
      TraceFromJson(j.value("exception", json()), j.value("message", json()),
                    j.value("frames", json::array()));
  report.bucket.hash = j.value("bucket_hash", "");
  report.bucket.exception_name = trace.exception_name;
  report.bucket.fallback = j.value("fallback", false);
  report.bucket.trace = std::move(trace);
  report.stderr_text = j.value("stderr", "");
  report.exit = ExitFromJson(j.value("exit", json::object()));
  report.strategy = j.value("strategy", "");
  report.seed = j.value("seed", uint64_t{0});
  const json version = j.value("target_version", json::object());
  report.target_version.command = version.value("command", "");
  report.target_version.version = version.value("version", "");
  report.target_version.framework = version.value("framework", "");
  report.replay_status = j.value("replay_status", "unreplayed");
  report.bucket.first_seen_ms =
      j.value("timestamps", json::object()).value("first_seen_ms", int64_t{0});
  return report;
}

bool IsBucketName(const std::string& name) {
  uint64_t ignored;
  return ParseHexU64(name, &ignored);
}

}  // namespace

uint64_t FrameHash(const StackFrame& frame) {
  uint64_t h = HashString(frame.class_name);
  h = HashCombine(h, HashString(frame.method_name));
  h = HashCombine(h, HashString(frame.file_name.value_or("")));
  return HashCombine(h, static_cast<uint64_t>(frame.line.value_or(0)));
}

uint64_t BucketHash(const StackTrace& trace, size_t top_k) {
  size_t n = trace.frames.size();
  if (top_k > 0) n = std::min(n, top_k);
  uint64_t h = kBucketHashSeed;
  for (size_t i = 0; i < n; ++i) h = HashCombine(h, FrameHash(trace.frames[i]));
  return HashCombine(h, n);
}

uint64_t EmptyTraceHash() { return BucketHash(StackTrace{}); }

uint64_t FallbackHash(const ExitStatus& exit, std::string_view stderr_text) {
  std::string_view first;
  size_t start = 0;
  while (start <= stderr_text.size()) {
    size_t end = stderr_text.find('\n', start);
    if (end == std::string_view::npos) end = stderr_text.size();
    std::string_view line = stderr_text.substr(start, end - start);
    absl::string_view trimmed =
        absl::StripAsciiWhitespace(absl::string_view(line.data(), line.size()));
    if (!trimmed.empty()) {
      first = std::string_view(trimmed.data(), trimmed.size());
      break;
    }
    start = end + 1;
  }
  uint64_t h = HashCombine(kFallbackHashSeed, static_cast<uint64_t>(exit.kind));
  h = HashCombine(h, static_cast<uint64_t>(static_cast<int64_t>(exit.value)));
  return HashCombine(h, HashString(first));
}

uint64_t BucketKey(const runner::RunOutcome& outcome, size_t top_k) {
  if (outcome.trace && !outcome.trace->frames.empty()) {
    return BucketHash(*outcome.trace, top_k);
  }
  return FallbackHash(outcome.exit, outcome.stderr_text);
}

std::string_view TriageStateName(TriageState state) {
  switch (state) {
    case TriageState::kNew:
      return "new";
    case TriageState::kConfirmed:
      return "confirmed";
    case TriageState::kDuplicate:
      return "duplicate";
    case TriageState::kWontfix:
      return "wontfix";
  }
  return "new";
}

std::optional<TriageState> ParseTriageState(std::string_view name) {
  for (auto s : {TriageState::kNew, TriageState::kConfirmed,
                 TriageState::kDuplicate, TriageState::kWontfix}) {
    if (TriageStateName(s) == name) return s;
  }
  return std::nullopt;
}

json TraceToJson(const StackTrace& trace) {
  json frames = json::array();
  for (const StackFrame& frame : trace.frames) {
    json f = {{"class", frame.class_name}, {"method", frame.method_name}};
    f["file"] = frame.file_name ? json(*frame.file_name) : json(nullptr);
    f["line"] = frame.line ? json(*frame.line) : json(nullptr);
    frames.push_back(std::move(f));
  }
  return {{"exception", trace.exception_name},
          {"message", trace.message ? json(*trace.message) : json(nullptr)},
          {"frames", std::move(frames)}};
}

json BucketToJson(const CrashBucket& bucket) {
  return {{"hash", bucket.hash},
          {"exception", bucket.exception_name},
          {"fallback", bucket.fallback},
          {"hit_count", bucket.hit_count},
          {"first_seen_ms", bucket.first_seen_ms},
          {"last_seen_ms", bucket.last_seen_ms},
          {"triage_state", std::string(TriageStateName(bucket.triage_state))},
          {"strategy_first", bucket.strategy_first}};
}

json ReportToJson(const CrashReport& report) {
  json trace = TraceToJson(report.bucket.trace);
  return {{"bucket_hash", report.bucket.hash},
          {"exception", trace["exception"]},
          {"message", trace["message"]},
          {"frames", trace["frames"]},
          {"fallback", report.bucket.fallback},
          {"exit", ExitToJson(report.exit)},
          {"stderr", report.stderr_text},
          {"strategy", report.strategy},
          {"seed", report.seed},
          {"target_version",
           {{"command", report.target_version.command},
            {"version", report.target_version.version},
            {"framework", report.target_version.framework}}},
          {"timestamps", {{"first_seen_ms", report.bucket.first_seen_ms}}},
          {"replay_status", report.replay_status}};
}

absl::StatusOr<std::unique_ptr<CrashStore>> CrashStore::Open(std::string dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    return absl::InternalError(
        absl::StrCat("cannot create ", dir, ": ", ec.message()));
  }
  std::unique_ptr<CrashStore> store(new CrashStore(std::move(dir)));
  if (absl::Status status = store->Load(); !status.ok()) return status;
  return store;
}

std::string CrashStore::BucketDir(std::string_view hash) const {
  return (fs::path(dir_) / std::string(hash)).string();
}

absl::Status CrashStore::Load() {
  for (const fs::directory_entry& entry : fs::directory_iterator(dir_)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_directory() || !IsBucketName(name)) continue;
    absl::StatusOr<std::string> state = ReadFile(entry.path() / "bucket.json");
    absl::StatusOr<std::string> report = ReadFile(entry.path() / "report.json");
    if (!state.ok() || !report.ok()) {
      LOG(WARNING) << "skipping incomplete bucket " << entry.path();
      continue;
    }
    json state_json = json::parse(*state, nullptr, false);
    json report_json = json::parse(*report, nullptr, false);
    if (state_json.is_discarded() || report_json.is_discarded()) {
      return absl::DataLossError(absl::StrCat("corrupt bucket ", name));
    }
    CrashReport parsed = ReportFromJson(report_json);
    buckets_.push_back(BucketFromJson(state_json, parsed.bucket.trace));
  }
  std::sort(buckets_.begin(), buckets_.end(),
            [](const CrashBucket& a, const CrashBucket& b) {
              return std::tie(a.first_seen_ms, a.hash) <
                     std::tie(b.first_seen_ms, b.hash);
            });
  return absl::OkStatus();
}

absl::Status CrashStore::WriteBucketState(const CrashBucket& bucket) const {
  return WriteFileAtomic(fs::path(BucketDir(bucket.hash)) / "bucket.json",
                         BucketToJson(bucket).dump(2) + "\n");
}

absl::StatusOr<std::pair<CrashBucket, bool>> CrashStore::Record(
    const runner::RunOutcome& outcome, std::string_view input,
    const CrashMeta& meta, size_t top_k) {
  if (outcome.classification != runner::Classification::kCrash) {
    return absl::InvalidArgumentError("outcome is not a crash");
  }
  const std::string hash = HexU64(BucketKey(outcome, top_k));
  std::lock_guard<std::mutex> lock(mu_);
  for (CrashBucket& bucket : buckets_) {
    if (bucket.hash != hash) continue;
    CrashBucket updated = bucket;
    ++updated.hit_count;
    updated.last_seen_ms = std::max(updated.last_seen_ms, meta.timestamp_ms);
    if (absl::Status status = WriteBucketState(updated); !status.ok()) {
      return status;
    }
    bucket = updated;
    return std::make_pair(bucket, false);
  }

  CrashBucket bucket;
  bucket.hash = hash;
  bucket.fallback = !outcome.trace || outcome.trace->frames.empty();
  if (outcome.trace) {
    bucket.trace = *outcome.trace;
    bucket.exception_name = outcome.trace->exception_name;
  } else {
    bucket.exception_name =
        absl::StrCat("<", runner::DescribeExit(outcome.exit), ">");
  }
  bucket.hit_count = 1;
  bucket.first_seen_ms = bucket.last_seen_ms = meta.timestamp_ms;
  bucket.strategy_first = meta.strategy;

  CrashReport report;
  report.bucket = bucket;
  report.stderr_text = outcome.stderr_text;
  report.exit = outcome.exit;
  report.strategy = meta.strategy;
  report.seed = meta.seed;
  report.target_version = meta.target_version;

  const fs::path dir = BucketDir(hash);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    return absl::InternalError(
        absl::StrCat("cannot create ", dir.string(), ": ", ec.message()));
  }
  // bucket.json goes last: its presence marks a complete bucket.
  for (absl::Status status :
       {WriteFileAtomic(dir / "input.bin", input),
        WriteFileAtomic(dir / "trace.txt", outcome.stderr_text),
        WriteFileAtomic(dir / "report.json",
                        ReportToJson(report).dump(2) + "\n"),
        WriteBucketState(bucket)}) {
    if (!status.ok()) return status;
  }
  buckets_.push_back(bucket);
  return std::make_pair(bucket, true);
}

absl::StatusOr<CrashBucket> CrashStore::SetTriageState(std::string_view hash,
                                                       TriageState state,
                                                       int64_t now_ms) {
  std::lock_guard<std::mutex> lock(mu_);
  for (CrashBucket& bucket : buckets_) {
    if (bucket.hash != hash) continue;
    CrashBucket updated = bucket;
    updated.triage_state = state;
    if (absl::Status status = WriteBucketState(updated); !status.ok()) {
      return status;
    }
    if (absl::Status status = AppendLine(
            fs::path(BucketDir(hash)) / "triage.log",
            absl::StrCat(now_ms, " ",
                         std::string(TriageStateName(bucket.triage_state)),
                         " -> ", std::string(TriageStateName(state))));
        !status.ok()) {
      return status;
    }
    bucket = updated;
    return bucket;
  }
  return absl::NotFoundError(
      absl::StrCat("unknown bucket ", std::string(hash)));
}

std::optional<CrashBucket> CrashStore::Get(std::string_view hash) const {
  std::lock_guard<std::mutex> lock(mu_);
  for (const CrashBucket& bucket : buckets_) {
    if (bucket.hash == hash) return bucket;
  }
  return std::nullopt;
}

std::vector<CrashBucket> CrashStore::List() const {
  std::lock_guard<std::mutex> lock(mu_);
  return buckets_;
}

size_t CrashStore::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return buckets_.size();
}

absl::StatusOr<CrashReport> CrashStore::LoadReport(
    std::string_view hash) const {
  std::optional<CrashBucket> bucket = Get(hash);
  if (!bucket)
    return absl::NotFoundError(
        absl::StrCat("unknown bucket ", std::string(hash)));
  std::lock_guard<std::mutex> lock(mu_);
  absl::StatusOr<std::string> text =
      ReadFile(fs::path(BucketDir(hash)) / "report.json");
  if (!text.ok()) return text.status();
  json j = json::parse(*text, nullptr, false);
  if (j.is_discarded()) {
    return absl::DataLossError(
        absl::StrCat("corrupt report ", std::string(hash)));
  }
  CrashReport report = ReportFromJson(j);
  report.bucket = *bucket;
  absl::StatusOr<std::string> input =
      ReadFile(fs::path(BucketDir(hash)) / "input.bin");
  if (!input.ok()) return input.status();
  report.input = std::move(*input);
  return report;
}

absl::StatusOr<std::string> CrashStore::LoadInput(std::string_view hash) const {
  if (!Get(hash))
    return absl::NotFoundError(
        absl::StrCat("unknown bucket ", std::string(hash)));
  return ReadFile(fs::path(BucketDir(hash)) / "input.bin");
}

absl::StatusOr<ReplayResult> CrashStore::Replay(std::string_view hash,
                                                const runner::TargetSpec& spec,
                                                size_t top_k) {
  absl::StatusOr<std::string> input = LoadInput(hash);
  if (!input.ok()) return input.status();
  ReplayResult result;
  for (int i = 0; i < kReplayRuns; ++i) {
    absl::StatusOr<runner::RunOutcome> outcome = runner::RunOnce(spec, *input);
    if (!outcome.ok()) return outcome.status();
    ++result.runs;
    if (outcome->classification == runner::Classification::kCrash &&
        HexU64(BucketKey(*outcome, top_k)) == hash) {
      ++result.matches;
    }
  }
  result.stable = result.matches >= kReplayMatches;

  std::lock_guard<std::mutex> lock(mu_);
  const fs::path path = fs::path(BucketDir(hash)) / "report.json";
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  json j = json::parse(*text, nullptr, false);
  if (j.is_discarded()) {
    return absl::DataLossError(
        absl::StrCat("corrupt report ", std::string(hash)));
  }
  j["replay_status"] = result.stable ? "stable" : "flaky";
  if (absl::Status status = WriteFileAtomic(path, j.dump(2) + "\n");
      !status.ok()) {
    return status;
  }
  return result;
}

absl::Status CrashStore::Audit() const {
  std::lock_guard<std::mutex> lock(mu_);
  size_t dirs = 0;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir_)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_directory() || !IsBucketName(name)) continue;
    ++dirs;
    absl::StatusOr<std::string> text = ReadFile(entry.path() / "report.json");
    if (!text.ok()) return text.status();
    json j = json::parse(*text, nullptr, false);
    if (j.is_discarded()) return absl::DataLossError("corrupt report " + name);
    CrashReport report = ReportFromJson(j);
    uint64_t recomputed = report.bucket.fallback
                              ? FallbackHash(report.exit, report.stderr_text)
                              : BucketHash(report.bucket.trace);
    if (HexU64(recomputed) != name || report.bucket.hash != name) {
      return absl::DataLossError(
          absl::StrCat("bucket ", name, " rehashes to ", HexU64(recomputed)));
    }
    auto it =
        std::find_if(buckets_.begin(), buckets_.end(),
                     [&](const CrashBucket& b) { return b.hash == name; });
    if (it == buckets_.end()) {
      return absl::DataLossError("unindexed bucket directory " + name);
    }
  }
  if (dirs != buckets_.size()) {
    return absl::DataLossError(
        absl::StrCat(buckets_.size(), " buckets but ", dirs, " directories"));
  }
  return absl::OkStatus();
}

}  // namespace verifuzz::triage
