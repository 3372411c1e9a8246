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

#include "verifuzz/runner.h"

#include <signal.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_split.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "verifuzz/toy/verifier.h"

namespace verifuzz::runner {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;
using ::testing::IsEmpty;
using ::testing::Not;

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

TargetSpec ShellSpec(const std::string& script, double timeout = 5) {
  TargetSpec spec;
  spec.command = {"/bin/sh", "-c", script, "sh", "{input}"};
  spec.timeout_seconds = timeout;
  return spec;
}

// True while `pid` exists and is not a zombie.
bool IsAlive(pid_t pid) {
  std::ifstream in("/proc/" + std::to_string(pid) + "/stat");
  std::string stat;
  if (!std::getline(in, stat)) return false;
  size_t close = stat.rfind(')');
  if (close == std::string::npos || close + 2 >= stat.size()) return false;
  char state = stat[close + 2];
  return state != 'Z' && state != 'X';
}

bool DiesWithin(pid_t pid, std::chrono::milliseconds limit) {
  auto until = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < until) {
    if (!IsAlive(pid)) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return !IsAlive(pid);
}

// ---------------------------------------------------------------------------
// Trace parsing.

struct TraceFixture {
  std::string file;
  std::string exception;  // "-" when no trace is expected.
  size_t frames = 0;
};

std::vector<TraceFixture> LoadFixtures() {
  std::vector<TraceFixture> fixtures;
  std::ifstream in(fs::path(VERIFUZZ_TESTDATA_DIR) / "traces/expected.tsv");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols = absl::StrSplit(line, '\t');
    if (cols.size() != 3) continue;
    TraceFixture fixture{cols[0], cols[1], 0};
    EXPECT_TRUE(absl::SimpleAtoi(cols[2], &fixture.frames)) << line;
    fixtures.push_back(fixture);
  }
  return fixtures;
}

TEST(ParseStackTraceTest, FixtureCorpusFrameCounts) {
  std::vector<TraceFixture> fixtures = LoadFixtures();
  ASSERT_EQ(fixtures.size(), 20u);
  int well_formed = 0;
  for (const TraceFixture& fixture : fixtures) {
    SCOPED_TRACE(fixture.file);
    std::string text =
        ReadFile(fs::path(VERIFUZZ_TESTDATA_DIR) / "traces" / fixture.file);
    ASSERT_THAT(text, Not(IsEmpty()));
    std::optional<StackTrace> trace = ParseStackTrace(text);
    if (fixture.exception == "-") {
      EXPECT_FALSE(trace.has_value());
      continue;
    }
    ++well_formed;
    ASSERT_TRUE(trace.has_value());
    EXPECT_EQ(trace->exception_name, fixture.exception);
    EXPECT_EQ(trace->frames.size(), fixture.frames);
    for (const StackFrame& frame : trace->frames) {
      EXPECT_FALSE(frame.class_name.empty());
      EXPECT_FALSE(frame.method_name.empty());
      if (frame.line) EXPECT_GT(*frame.line, 0);
    }
  }
  EXPECT_EQ(well_formed, 15);
}

TEST(ParseStackTraceTest, FixtureCorpusRoundTrips) {
  for (const TraceFixture& fixture : LoadFixtures()) {
    if (fixture.exception == "-") continue;
    SCOPED_TRACE(fixture.file);
    std::optional<StackTrace> trace = ParseStackTrace(
        ReadFile(fs::path(VERIFUZZ_TESTDATA_DIR) / "traces" / fixture.file));
    ASSERT_TRUE(trace.has_value());
    std::string rendered = RenderStackTrace(*trace);
    std::optional<StackTrace> again = ParseStackTrace(rendered);
    ASSERT_TRUE(again.has_value()) << rendered;
    EXPECT_EQ(*again, *trace);
    EXPECT_EQ(RenderStackTrace(*again), rendered);
  }
}

TEST(ParseStackTraceTest, FrameFields) {
  std::optional<StackTrace> trace = ParseStackTrace(
      "java.lang.NumberFormatException: For input string: \"9\"\n"
      "\tat verifier.col.Namer.suffix(Namer.scala:120)\n"
      "\tat verifier.col.Namer.declare(Unknown Source)\n");
  ASSERT_TRUE(trace.has_value());
  EXPECT_EQ(trace->exception_name, "java.lang.NumberFormatException");
  EXPECT_EQ(trace->message, "For input string: \"9\"");
  ASSERT_EQ(trace->frames.size(), 2u);
  EXPECT_EQ(trace->frames[0],
            (StackFrame{"verifier.col.Namer", "suffix", "Namer.scala", 120}));
  EXPECT_EQ(trace->frames[1], (StackFrame{"verifier.col.Namer", "declare",
                                          std::nullopt, std::nullopt}));
}

TEST(ParseStackTraceTest, HeaderWithoutMessage) {
  std::optional<StackTrace> trace = ParseStackTrace(
      "Exception in thread \"main\" NumberFormatException\n"
      "\tat Namer.suffix(Namer.scala:1)\n");
  ASSERT_TRUE(trace.has_value());
  EXPECT_EQ(trace->exception_name, "NumberFormatException");
  EXPECT_FALSE(trace->message.has_value());
}

TEST(ParseStackTraceTest, NoFramesMeansNoTrace) {
  EXPECT_FALSE(ParseStackTrace("").has_value());
  EXPECT_FALSE(ParseStackTrace("error: parse error at 3:1\n").has_value());
  EXPECT_FALSE(ParseStackTrace("java.lang.Error: x\n").has_value());
}

TEST(ParseStackTraceTest, ParsesToyVerifierTraces) {
  for (int i = 0; i < toy::kBugCount; ++i) {
    auto bug = static_cast<toy::Bug>(i);
    toy::CheckResult result =
        toy::Check(toy::CanonicalTrigger(bug), toy::BugToggles().set(i));
    ASSERT_TRUE(result.crash.has_value()) << toy::BugName(bug);
    std::optional<StackTrace> trace = ParseStackTrace(result.StderrText());
    ASSERT_TRUE(trace.has_value()) << result.StderrText();
    EXPECT_EQ(trace->exception_name, result.crash->exception);
    EXPECT_EQ(trace->frames.size(), result.crash->frames.size());
  }
}

// ---------------------------------------------------------------------------
// Classification.

TEST(ClassifyTest, Examples) {
  TargetSpec spec;
  EXPECT_EQ(Classify(ExitStatus::Code(0), "", spec), Classification::kVerified);
  EXPECT_EQ(Classify(ExitStatus::Code(0), "warning: unused variable\n", spec),
            Classification::kVerified);
  EXPECT_EQ(Classify(ExitStatus::Code(1), "error: parse error at 3:1\n", spec),
            Classification::kCleanError);
  EXPECT_EQ(Classify(ExitStatus::Code(1),
                     "Exception in thread \"main\" NumberFormatException\n"
                     "\tat Namer.suffix(Namer.scala:120)\n",
                     spec),
            Classification::kCrash);
  EXPECT_EQ(Classify(ExitStatus::Signal(SIGSEGV), "", spec),
            Classification::kCrash);
  EXPECT_EQ(Classify(ExitStatus::Signal(SIGKILL), "", spec),
            Classification::kCrash);
  EXPECT_EQ(Classify(ExitStatus::Code(70), "", spec), Classification::kCrash);
  EXPECT_EQ(Classify(ExitStatus::Code(134), "", spec), Classification::kCrash);
  EXPECT_EQ(Classify(ExitStatus::Timeout(), "java.lang.Error: x\n\tat a.b(C:1)",
                     spec),
            Classification::kTimeout);
  EXPECT_EQ(Classify(ExitStatus::Signal(SIGXCPU), "", spec),
            Classification::kResourceLimit);
  spec.crash_exit_codes = {3};
  EXPECT_EQ(Classify(ExitStatus::Code(70), "", spec),
            Classification::kCleanError);
  EXPECT_EQ(Classify(ExitStatus::Code(3), "", spec), Classification::kCrash);
}

TEST(ClassifyTest, NamesRoundTrip) {
  for (auto c : {Classification::kVerified, Classification::kCleanError,
                 Classification::kCrash, Classification::kTimeout,
                 Classification::kResourceLimit}) {
    EXPECT_EQ(ParseClassification(ClassificationName(c)), c);
  }
  EXPECT_FALSE(ParseClassification("bogus").has_value());
}

// ---------------------------------------------------------------------------
// Spec handling.

TEST(TargetSpecTest, Validate) {
  TargetSpec spec;
  EXPECT_FALSE(spec.Validate().ok());
  spec.command = {"tool", "{input}"};
  EXPECT_TRUE(spec.Validate().ok());
  spec.command = {"tool", "{input}", "{input}"};
  EXPECT_FALSE(spec.Validate().ok());
  spec.command = {"tool", "--in={input}"};
  EXPECT_TRUE(spec.Validate().ok());
  spec.command = {"tool"};
  EXPECT_FALSE(spec.Validate().ok());
  spec.command = {"tool", "{input}"};
  spec.timeout_seconds = 0;
  EXPECT_FALSE(spec.Validate().ok());
}

TEST(SplitCommandLineTest, QuotingRules) {
  absl::StatusOr<std::vector<std::string>> words =
      SplitCommandLine("tool  --bugs 'B1,B2' \"a \\\"b\\\"\" x\\ y {input}");
  ASSERT_TRUE(words.ok());
  EXPECT_EQ(*words, (std::vector<std::string>{"tool", "--bugs", "B1,B2",
                                              "a \"b\"", "x y", "{input}"}));
  words = SplitCommandLine("tool $HOME '' {input}");
  ASSERT_TRUE(words.ok());
  EXPECT_EQ(*words, (std::vector<std::string>{"tool", "$HOME", "", "{input}"}));
  EXPECT_FALSE(SplitCommandLine("tool 'unterminated").ok());
  EXPECT_FALSE(SplitCommandLine("tool \"unterminated").ok());
  EXPECT_FALSE(SplitCommandLine("tool \\").ok());
}

TEST(ReadCoverageFileTest, Examples) {
  fs::path dir = fs::temp_directory_path() / "verifuzz-cov-test";
  fs::create_directories(dir);
  auto write = [&](const std::string& text) {
    std::ofstream(dir / "cov.txt", std::ios::trunc) << text;
    return (dir / "cov.txt").string();
  };
  int warnings = -1;
  EXPECT_EQ(ReadCoverageFile(write("1\n2\n2\n"), &warnings),
            (std::set<uint64_t>{1, 2}));
  EXPECT_EQ(warnings, 0);
  EXPECT_THAT(ReadCoverageFile(write(""), &warnings), IsEmpty());
  EXPECT_EQ(ReadCoverageFile(write("7\nxyz\n9\n"), &warnings),
            (std::set<uint64_t>{7, 9}));
  EXPECT_EQ(warnings, 1);
  EXPECT_EQ(ReadCoverageFile(write("-3\n18446744073709551615\n"), &warnings),
            (std::set<uint64_t>{18446744073709551615ull}));
  EXPECT_EQ(warnings, 1);
  EXPECT_THAT(ReadCoverageFile((dir / "missing.txt").string(), &warnings),
              IsEmpty());
  EXPECT_EQ(warnings, 0);
  fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// Process execution.

TEST(RunOnceTest, VerifiedAndCleanError) {
  absl::StatusOr<RunOutcome> ok = RunOnce(ShellSpec("exit 0"), "x");
  ASSERT_TRUE(ok.ok()) << ok.status();
  EXPECT_EQ(ok->exit, ExitStatus::Code(0));
  EXPECT_EQ(ok->classification, Classification::kVerified);

  absl::StatusOr<RunOutcome> bad =
      RunOnce(ShellSpec("echo 'error: parse error at 3:1' >&2; exit 1"), "x");
  ASSERT_TRUE(bad.ok());
  EXPECT_EQ(bad->exit, ExitStatus::Code(1));
  EXPECT_EQ(bad->stderr_text, "error: parse error at 3:1\n");
  EXPECT_EQ(bad->classification, Classification::kCleanError);
  EXPECT_FALSE(bad->trace.has_value());
}

TEST(RunOnceTest, InputIsWrittenAndStreamsCaptured) {
  absl::StatusOr<RunOutcome> outcome =
      RunOnce(ShellSpec("cat \"$1\"; printf err >&2"), "hello\0world");
  ASSERT_TRUE(outcome.ok());
  EXPECT_EQ(outcome->stdout_text, "hello");
  EXPECT_EQ(outcome->stderr_text, "err");
  std::string binary("a\0b", 3);
  outcome = RunOnce(ShellSpec("cat \"$1\""), binary);
  ASSERT_TRUE(outcome.ok());
  EXPECT_EQ(outcome->stdout_text, binary);
}

TEST(RunOnceTest, StdinIsClosed) {
  absl::StatusOr<RunOutcome> outcome =
      RunOnce(ShellSpec("cat; echo done", 2), "");
  ASSERT_TRUE(outcome.ok());
  EXPECT_EQ(outcome->stdout_text, "done\n");
}

TEST(RunOnceTest, SignalIsCrash) {
  absl::StatusOr<RunOutcome> outcome = RunOnce(ShellSpec("kill -SEGV $$"), "");
  ASSERT_TRUE(outcome.ok());
  EXPECT_EQ(outcome->exit, ExitStatus::Signal(SIGSEGV));
  EXPECT_EQ(outcome->classification, Classification::kCrash);
}

TEST(RunOnceTest, TimeoutWithinGrace) {
  absl::StatusOr<RunOutcome> outcome = RunOnce(ShellSpec("sleep 30", 0.3), "");
  ASSERT_TRUE(outcome.ok());
  EXPECT_EQ(outcome->exit, ExitStatus::Timeout());
  EXPECT_EQ(outcome->classification, Classification::kTimeout);
  EXPECT_GE(outcome->duration_ms, 300);
  EXPECT_LE(outcome->duration_ms, 300 + kKillGraceMs);
}

TEST(RunOnceTest, IgnoredTermIsFollowedByKill) {
  absl::StatusOr<RunOutcome> outcome =
      RunOnce(ShellSpec("trap '' TERM; while :; do sleep 0.05; done", 0.3), "");
  ASSERT_TRUE(outcome.ok());
  EXPECT_EQ(outcome->classification, Classification::kTimeout);
  EXPECT_LE(outcome->duration_ms, 300 + kKillGraceMs);
}

TEST(RunOnceTest, KillsBackgroundedDescendants) {
  // The shell exits at once but leaves a child holding stdout.
  absl::StatusOr<RunOutcome> outcome =
      RunOnce(ShellSpec("sleep 60 & echo $!; exit 0"), "");
  ASSERT_TRUE(outcome.ok());
  EXPECT_EQ(outcome->classification, Classification::kVerified);
  pid_t pid = 0;
  ASSERT_TRUE(
      absl::SimpleAtoi(absl::StripAsciiWhitespace(outcome->stdout_text), &pid));
  EXPECT_TRUE(DiesWithin(pid, std::chrono::milliseconds(2000)));
}

TEST(RunOnceTest, KillsDetachedDescendants) {
  // The grandchild drops the pipes, so the run ends while it sleeps.
  absl::StatusOr<RunOutcome> outcome = RunOnce(
      ShellSpec("sleep 60 >/dev/null 2>&1 </dev/null & echo $!; exit 0"), "");
  ASSERT_TRUE(outcome.ok());
  pid_t pid = 0;
  ASSERT_TRUE(
      absl::SimpleAtoi(absl::StripAsciiWhitespace(outcome->stdout_text), &pid));
  EXPECT_TRUE(DiesWithin(pid, std::chrono::milliseconds(2000)));
}

TEST(RunOnceTest, KillsDescendantsOnTimeout) {
  fs::path marker = fs::temp_directory_path() / "verifuzz-kill-marker";
  fs::remove(marker);
  absl::StatusOr<RunOutcome> outcome =
      RunOnce(ShellSpec("(trap '' TERM; sleep 60) & echo $! > " +
                            marker.string() + "; wait",
                        0.3),
              "");
  ASSERT_TRUE(outcome.ok());
  EXPECT_EQ(outcome->classification, Classification::kTimeout);
  pid_t pid = 0;
  ASSERT_TRUE(
      absl::SimpleAtoi(absl::StripAsciiWhitespace(ReadFile(marker)), &pid));
  EXPECT_TRUE(DiesWithin(pid, std::chrono::milliseconds(2000)));
  fs::remove(marker);
}

TEST(RunOnceTest, StreamsAreTruncated) {
  absl::StatusOr<RunOutcome> outcome = RunOnce(
      ShellSpec("head -c 3000000 /dev/zero; head -c 10 /dev/zero >&2"), "");
  ASSERT_TRUE(outcome.ok());
  EXPECT_EQ(outcome->stdout_text.size(), kMaxStreamBytes);
  EXPECT_TRUE(outcome->stdout_truncated);
  EXPECT_EQ(outcome->stderr_text.size(), 10u);
  EXPECT_FALSE(outcome->stderr_truncated);
  EXPECT_EQ(outcome->classification, Classification::kVerified);
}

TEST(RunOnceTest, MissingBinaryIsConfigurationError) {
  TargetSpec spec;
  spec.command = {"/nonexistent/verifier", "{input}"};
  absl::StatusOr<RunOutcome> outcome = RunOnce(spec, "");
  EXPECT_EQ(outcome.status().code(), absl::StatusCode::kFailedPrecondition);
  spec.command = {"no-such-verifier-on-path", "{input}"};
  EXPECT_EQ(RunOnce(spec, "").status().code(),
            absl::StatusCode::kFailedPrecondition);
  spec.command = {"tool"};
  EXPECT_EQ(RunOnce(spec, "").status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(RunOnceTest, ConcurrentRunsAreIsolated) {
  fs::path work = fs::temp_directory_path() / "verifuzz-isolation";
  fs::remove_all(work);
  TargetSpec spec = ShellSpec(
      "echo \"$1\"; echo \"$AVALANCHE_COV\"; cat \"$1\"; "
      "sleep 0.2; echo 5 > \"$AVALANCHE_COV\"; cat \"$1\" >> "
      "\"$AVALANCHE_COV\"");
  constexpr int kRuns = 6;
  std::vector<std::future<absl::StatusOr<RunOutcome>>> futures;
  for (int i = 0; i < kRuns; ++i) {
    futures.push_back(std::async(std::launch::async, [&, i] {
      return RunOnce(spec, std::to_string(100 + i), work.string());
    }));
  }
  std::set<std::string> inputs;
  std::set<std::string> coverage_files;
  for (int i = 0; i < kRuns; ++i) {
    absl::StatusOr<RunOutcome> outcome = futures[i].get();
    ASSERT_TRUE(outcome.ok());
    std::vector<std::string> lines = absl::StrSplit(outcome->stdout_text, '\n');
    ASSERT_GE(lines.size(), 3u);
    inputs.insert(lines[0]);
    coverage_files.insert(lines[1]);
    EXPECT_EQ(lines[2], std::to_string(100 + i));
    EXPECT_EQ(outcome->coverage,
              (std::set<uint64_t>{5, static_cast<uint64_t>(100 + i)}));
  }
  EXPECT_EQ(inputs.size(), static_cast<size_t>(kRuns));
  EXPECT_EQ(coverage_files.size(), static_cast<size_t>(kRuns));
  // Per-run directories are removed afterwards.
  EXPECT_TRUE(fs::is_empty(work));
  fs::remove_all(work);
}

TEST(RunOnceTest, CoverageEnvironmentOverridesInherited) {
  setenv("AVALANCHE_COV", "/should/not/be/used", 1);
  absl::StatusOr<RunOutcome> outcome =
      RunOnce(ShellSpec("echo \"$AVALANCHE_COV\""), "");
  unsetenv("AVALANCHE_COV");
  ASSERT_TRUE(outcome.ok());
  EXPECT_THAT(outcome->stdout_text, Not(HasSubstr("/should/not")));
  EXPECT_THAT(outcome->stdout_text, HasSubstr("coverage.txt"));
}

// ---------------------------------------------------------------------------
// End to end against the toy verifier.

TargetSpec ToySpec(const std::string& bugs) {
  TargetSpec spec;
  spec.command = {TOY_VERIFIER_PATH, "--bugs", bugs.empty() ? "none" : bugs,
                  "{input}"};
  spec.skip_backend_args = {"--skip-backend"};
  spec.version_args = {"--version"};
  return spec;
}

TEST(RunOnceToyTest, CanonicalTriggersCrashOnlyWhenSeeded) {
  for (int i = 0; i < toy::kBugCount; ++i) {
    auto bug = static_cast<toy::Bug>(i);
    SCOPED_TRACE(toy::BugName(bug));
    absl::StatusOr<RunOutcome> on = RunOnce(
        ToySpec(std::string(toy::BugName(bug))), toy::CanonicalTrigger(bug));
    ASSERT_TRUE(on.ok()) << on.status();
    EXPECT_EQ(on->exit, ExitStatus::Code(70));
    EXPECT_EQ(on->classification, Classification::kCrash);
    ASSERT_TRUE(on->trace.has_value());
    EXPECT_FALSE(on->trace->frames.empty());
    EXPECT_THAT(on->coverage, Not(IsEmpty()));

    absl::StatusOr<RunOutcome> off =
        RunOnce(ToySpec(""), toy::CanonicalTrigger(bug));
    ASSERT_TRUE(off.ok());
    EXPECT_THAT(off->exit.value, ::testing::AnyOf(0, 1));
    EXPECT_NE(off->classification, Classification::kCrash);
  }
}

TEST(RunOnceToyTest, CoverageMatchesInProcessCounters) {
  const std::string program = "class A {\n  int f;\n}\nvoid m() {\n}\n";
  absl::StatusOr<RunOutcome> outcome = RunOnce(ToySpec(""), program);
  ASSERT_TRUE(outcome.ok());
  EXPECT_EQ(outcome->classification, Classification::kVerified);
  EXPECT_EQ(outcome->stdout_text, "verified (backend skipped)\n");
  toy::CheckResult expected = toy::Check(program, toy::BugToggles());
  EXPECT_EQ(outcome->coverage, std::set<uint64_t>(expected.counters.begin(),
                                                  expected.counters.end()));
}

TEST(RunOnceToyTest, ProbeVersion) {
  EXPECT_EQ(ProbeVersion(ToySpec("")), "toy-verifier 1.0.0");
  TargetSpec no_flag = ToySpec("");
  no_flag.version_args.clear();
  EXPECT_EQ(ProbeVersion(no_flag), "unknown");
  TargetSpec missing = ToySpec("");
  missing.command[0] = "/nonexistent/verifier";
  EXPECT_EQ(ProbeVersion(missing), "unknown");
}

}  // namespace
}  // namespace verifuzz::runner
