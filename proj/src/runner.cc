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

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <stdlib.h>
#include <sys/resource.h>
#include <sys/syscall.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/strip.h"
#include "glog/logging.h"

extern char** environ;

namespace verifuzz::runner {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// ---------------------------------------------------------------------------
// Trace parsing.

std::vector<std::string_view> SplitView(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  for (size_t at = text.find(sep); at != std::string_view::npos;
       at = text.find(sep, start)) {
    parts.push_back(text.substr(start, at - start));
    start = at + 1;
  }
  parts.push_back(text.substr(start));
  return parts;
}

bool IsNameChar(char c) {
  return absl::ascii_isalnum(static_cast<unsigned char>(c)) || c == '_' ||
         c == '$';
}

std::string_view StripCr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

std::string_view TrimLeft(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  return s;
}

// Dotted name such as "java.lang.NumberFormatException".
bool IsDottedName(std::string_view name) {
  if (name.empty()) return false;
  for (std::string_view part : SplitView(name, '.')) {
    if (part.empty()) return false;
    if (absl::ascii_isdigit(static_cast<unsigned char>(part.front()))) {
      return false;
    }
    for (char c : part) {
      if (!IsNameChar(c)) return false;
    }
  }
  return true;
}

struct Header {
  std::string name;
  std::optional<std::string> message;
};

std::optional<Header> ParseHeader(std::string_view line) {
  line = StripCr(line);
  constexpr std::string_view kThreadPrefix = "Exception in thread \"";
  if (line.substr(0, kThreadPrefix.size()) == kThreadPrefix) {
    size_t close = line.find("\" ", kThreadPrefix.size());
    if (close == std::string_view::npos) return std::nullopt;
    line.remove_prefix(close + 2);
  }
  size_t end = 0;
  while (end < line.size() && (IsNameChar(line[end]) || line[end] == '.')) {
    ++end;
  }
  std::string_view name = line.substr(0, end);
  if (!IsDottedName(name)) return std::nullopt;
  std::string_view rest = line.substr(end);
  Header header{std::string(name), std::nullopt};
  if (rest.empty()) return header;
  if (rest == ":") {
    header.message = "";
    return header;
  }
  if (rest.substr(0, 2) != ": ") return std::nullopt;
  header.message = std::string(rest.substr(2));
  return header;
}

std::optional<StackFrame> ParseFrame(std::string_view line) {
  line = TrimLeft(StripCr(line));
  if (line.substr(0, 3) != "at ") return std::nullopt;
  line.remove_prefix(3);
  size_t open = line.find('(');
  if (open == std::string_view::npos || line.back() != ')') return std::nullopt;
  std::string_view qualified = line.substr(0, open);
  std::string_view location = line.substr(open + 1, line.size() - open - 2);
  size_t dot = qualified.rfind('.');
  if (dot == std::string_view::npos || dot == 0 ||
      dot + 1 == qualified.size()) {
    return std::nullopt;
  }
  StackFrame frame;
  frame.class_name = std::string(qualified.substr(0, dot));
  frame.method_name = std::string(qualified.substr(dot + 1));
  for (char c : frame.class_name) {
    if (!IsNameChar(c) && c != '.' && c != '/' && c != '-' && c != '@') {
      return std::nullopt;
    }
  }
  for (char c : frame.method_name) {
    if (!IsNameChar(c) && c != '<' && c != '>') return std::nullopt;
  }
  if (location == "Unknown Source" || location == "Native Method") {
    return frame;
  }
  size_t colon = location.rfind(':');
  if (colon == std::string_view::npos) {
    if (location.empty() || location.find('(') != std::string_view::npos) {
      return std::nullopt;
    }
    frame.file_name = std::string(location);
    return frame;
  }
  int line_number = 0;
  if (colon == 0 ||
      !absl::SimpleAtoi(absl::string_view(location.data() + colon + 1,
                                          location.size() - colon - 1),
                        &line_number) ||
      line_number <= 0) {
    return std::nullopt;
  }
  frame.file_name = std::string(location.substr(0, colon));
  frame.line = line_number;
  return frame;
}

bool IsElisionLine(std::string_view line) {
  line = TrimLeft(StripCr(line));
  if (line.substr(0, 4) != "... ") return false;
  line.remove_prefix(4);
  size_t digits = 0;
  while (digits < line.size() && absl::ascii_isdigit(line[digits])) ++digits;
  return digits > 0 && line.substr(digits) == " more";
}

// ---------------------------------------------------------------------------
// Process control.

// Reads whatever is available on `fd` into `out`, keeping at most
// kMaxStreamBytes. Returns false at end of stream.
bool Drain(int fd, std::string& out, bool& truncated) {
  char buffer[65536];
  ssize_t n = read(fd, buffer, sizeof(buffer));
  if (n < 0) return errno == EINTR || errno == EAGAIN;
  if (n == 0) return false;
  size_t room = kMaxStreamBytes - std::min(out.size(), kMaxStreamBytes);
  size_t keep = std::min(room, static_cast<size_t>(n));
  out.append(buffer, keep);
  if (keep < static_cast<size_t>(n)) truncated = true;
  return true;
}

int PidFdOpen(pid_t pid) {
#ifdef SYS_pidfd_open
  return static_cast<int>(syscall(SYS_pidfd_open, pid, 0));
#else
  return -1;
#endif
}

class UniqueFd {
 public:
  explicit UniqueFd(int fd = -1) : fd_(fd) {}
  ~UniqueFd() { Reset(); }
  UniqueFd(const UniqueFd&) = delete;
  UniqueFd& operator=(const UniqueFd&) = delete;
  UniqueFd(UniqueFd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  UniqueFd& operator=(UniqueFd&& other) noexcept {
    if (this != &other) {
      Reset();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  int get() const { return fd_; }
  void Reset() {
    if (fd_ >= 0) close(fd_);
    fd_ = -1;
  }

 private:
  int fd_;
};

struct Pipe {
  UniqueFd read_end;
  UniqueFd write_end;
};

absl::StatusOr<Pipe> MakePipe() {
  int fds[2];
  if (pipe2(fds, O_CLOEXEC) != 0) {
    return absl::InternalError(absl::StrCat("pipe: ", std::strerror(errno)));
  }
  Pipe p;
  p.read_end = UniqueFd(fds[0]);
  p.write_end = UniqueFd(fds[1]);
  return p;
}

std::string MakeRunDir(const std::string& work_dir) {
  std::string base = work_dir;
  if (base.empty()) {
    const char* tmp = std::getenv("TMPDIR");
    base = tmp != nullptr && *tmp ? tmp : "/tmp";
  }
  std::error_code ec;
  fs::create_directories(base, ec);
  std::string pattern = base + "/verifuzz-run-XXXXXX";
  if (mkdtemp(pattern.data()) == nullptr) return "";
  return pattern;
}

// Runs `args` in its own process group with `cwd` as working directory and
// returns exit status, captured streams and wall time.
absl::StatusOr<RunOutcome> Execute(const std::vector<std::string>& args,
                                   const std::vector<std::string>& env,
                                   const std::string& cwd,
                                   double timeout_seconds,
                                   uint64_t memory_limit_mb) {
  // Everything the child needs is prepared before fork().
  std::vector<char*> argv;
  for (const std::string& a : args)
    argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  std::vector<char*> envp;
  for (const std::string& e : env) envp.push_back(const_cast<char*>(e.c_str()));
  envp.push_back(nullptr);
  const rlim_t cpu_limit = static_cast<rlim_t>(std::ceil(timeout_seconds)) + 2;
  const rlim_t as_limit = memory_limit_mb << 20;

  absl::StatusOr<Pipe> out_pipe = MakePipe();
  absl::StatusOr<Pipe> err_pipe = MakePipe();
  absl::StatusOr<Pipe> exec_pipe = MakePipe();
  if (!out_pipe.ok()) return out_pipe.status();
  if (!err_pipe.ok()) return err_pipe.status();
  if (!exec_pipe.ok()) return exec_pipe.status();

  const Clock::time_point start = Clock::now();
  pid_t pid = fork();
  if (pid < 0) {
    return absl::InternalError(absl::StrCat("fork: ", std::strerror(errno)));
  }
  if (pid == 0) {
    setpgid(0, 0);
    int devnull = open("/dev/null", O_RDONLY);
    if (devnull >= 0) dup2(devnull, STDIN_FILENO);
    dup2(out_pipe->write_end.get(), STDOUT_FILENO);
    dup2(err_pipe->write_end.get(), STDERR_FILENO);
    struct rlimit cpu = {cpu_limit, cpu_limit + 1};
    setrlimit(RLIMIT_CPU, &cpu);
    if (as_limit > 0) {
      struct rlimit as = {as_limit, as_limit};
      setrlimit(RLIMIT_AS, &as);
    }
    if (chdir(cwd.c_str()) != 0) _exit(127);
    execvpe(argv[0], argv.data(), envp.data());
    int err = errno;
    ssize_t ignored = write(exec_pipe->write_end.get(), &err, sizeof(err));
    (void)ignored;
    _exit(127);
  }
  setpgid(pid, pid);
  out_pipe->write_end.Reset();
  err_pipe->write_end.Reset();
  exec_pipe->write_end.Reset();

  int exec_errno = 0;
  if (read(exec_pipe->read_end.get(), &exec_errno, sizeof(exec_errno)) ==
      sizeof(exec_errno)) {
    int status;
    waitpid(pid, &status, 0);
    return absl::FailedPreconditionError(absl::StrCat(
        "cannot execute ", args[0], ": ", std::strerror(exec_errno)));
  }

  RunOutcome outcome;
  UniqueFd pidfd(PidFdOpen(pid));
  const auto deadline =
      start +
      std::chrono::milliseconds(static_cast<int64_t>(timeout_seconds * 1000));
  std::optional<Clock::time_point> kill_at;
  bool timed_out = false;
  bool out_open = true;
  bool err_open = true;
  bool exited = false;
  int status = 0;

  while (!exited || out_open || err_open) {
    if (!exited && waitpid(pid, &status, WNOHANG) == pid) exited = true;
    const Clock::time_point now = Clock::now();
    if (!exited && !timed_out && now >= deadline) {
      timed_out = true;
      kill(-pid, SIGTERM);
      // Leave a little of the grace window for reaping after SIGKILL.
      kill_at = now + std::chrono::milliseconds(kKillGraceMs * 4 / 5);
    }
    if (!exited && kill_at && now >= *kill_at) {
      kill(-pid, SIGKILL);
      kill_at.reset();
    }
    if (exited && (out_open || err_open)) {
      // Descendants may still hold the pipes; nothing may outlive the run.
      kill(-pid, SIGKILL);
    }
    pollfd fds[3];
    int nfds = 0;
    if (out_open) fds[nfds++] = {out_pipe->read_end.get(), POLLIN, 0};
    if (err_open) fds[nfds++] = {err_pipe->read_end.get(), POLLIN, 0};
    if (!exited && pidfd.get() >= 0) fds[nfds++] = {pidfd.get(), POLLIN, 0};
    int wait_ms = 5;
    if (!exited && pidfd.get() >= 0) {
      Clock::time_point next = kill_at ? *kill_at : deadline;
      wait_ms = static_cast<int>(std::clamp<int64_t>(
          std::chrono::duration_cast<std::chrono::milliseconds>(next - now)
                  .count() +
              1,
          1, 1000));
    }
    if (exited && !out_open && !err_open) break;
    int ready = poll(fds, nfds, wait_ms);
    if (ready < 0 && errno != EINTR) break;
    for (int i = 0; i < nfds; ++i) {
      if ((fds[i].revents & (POLLIN | POLLHUP | POLLERR)) == 0) continue;
      if (out_open && fds[i].fd == out_pipe->read_end.get()) {
        out_open =
            Drain(fds[i].fd, outcome.stdout_text, outcome.stdout_truncated);
      } else if (err_open && fds[i].fd == err_pipe->read_end.get()) {
        err_open =
            Drain(fds[i].fd, outcome.stderr_text, outcome.stderr_truncated);
      }
    }
  }
  kill(-pid, SIGKILL);
  outcome.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            Clock::now() - start)
                            .count();

  if (timed_out) {
    outcome.exit = ExitStatus::Timeout();
  } else if (WIFSIGNALED(status)) {
    outcome.exit = ExitStatus::Signal(WTERMSIG(status));
  } else {
    outcome.exit = ExitStatus::Code(WEXITSTATUS(status));
  }
  return outcome;
}

}  // namespace

absl::Status TargetSpec::Validate() const {
  if (command.empty()) return absl::InvalidArgumentError("empty command");
  int placeholders = 0;
  for (const std::string& arg : command) {
    for (size_t at = arg.find(kInputPlaceholder); at != std::string::npos;
         at = arg.find(kInputPlaceholder, at + 1)) {
      ++placeholders;
    }
  }
  if (placeholders != 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "command must contain {input} exactly once, found ", placeholders));
  }
  if (!(timeout_seconds > 0)) {
    return absl::InvalidArgumentError("timeout must be positive");
  }
  if (input_name.empty() || input_name.find('/') != std::string::npos) {
    return absl::InvalidArgumentError("input_name must be a plain file name");
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<std::string>> SplitCommandLine(
    std::string_view command) {
  std::vector<std::string> words;
  std::string word;
  bool in_word = false;
  for (size_t i = 0; i < command.size(); ++i) {
    char c = command[i];
    if (c == ' ' || c == '\t' || c == '\n') {
      if (in_word) words.push_back(std::move(word));
      word.clear();
      in_word = false;
      continue;
    }
    in_word = true;
    if (c == '\\') {
      if (++i == command.size()) {
        return absl::InvalidArgumentError("trailing backslash");
      }
      word += command[i];
    } else if (c == '\'') {
      size_t close = command.find('\'', i + 1);
      if (close == std::string_view::npos) {
        return absl::InvalidArgumentError("unterminated single quote");
      }
      word.append(command.substr(i + 1, close - i - 1));
      i = close;
    } else if (c == '"') {
      for (++i; i < command.size() && command[i] != '"'; ++i) {
        if (command[i] == '\\' && i + 1 < command.size() &&
            std::string_view("\"\\$`").find(command[i + 1]) !=
                std::string_view::npos) {
          ++i;
        }
        word += command[i];
      }
      if (i == command.size()) {
        return absl::InvalidArgumentError("unterminated double quote");
      }
    } else {
      word += c;
    }
  }
  if (in_word) words.push_back(std::move(word));
  return words;
}

std::string DescribeExit(const ExitStatus& exit) {
  switch (exit.kind) {
    case ExitStatus::Kind::kCode:
      return absl::StrCat("code ", exit.value);
    case ExitStatus::Kind::kSignal:
      return absl::StrCat("signal ", exit.value);
    case ExitStatus::Kind::kTimeout:
      return "timeout";
  }
  return "unknown";
}

std::string_view ClassificationName(Classification c) {
  switch (c) {
    case Classification::kVerified:
      return "verified";
    case Classification::kCleanError:
      return "clean_error";
    case Classification::kCrash:
      return "crash";
    case Classification::kTimeout:
      return "timeout";
    case Classification::kResourceLimit:
      return "resource_limit";
  }
  return "unknown";
}

std::optional<Classification> ParseClassification(std::string_view name) {
  for (auto c : {Classification::kVerified, Classification::kCleanError,
                 Classification::kCrash, Classification::kTimeout,
                 Classification::kResourceLimit}) {
    if (ClassificationName(c) == name) return c;
  }
  return std::nullopt;
}

std::optional<StackTrace> ParseStackTrace(std::string_view text) {
  std::vector<std::string_view> lines = SplitView(text, '\n');
  for (size_t i = 0; i + 1 < lines.size(); ++i) {
    std::optional<Header> header = ParseHeader(lines[i]);
    if (!header || !ParseFrame(lines[i + 1])) continue;
    StackTrace trace;
    trace.exception_name = std::move(header->name);
    trace.message = std::move(header->message);
    size_t j = i + 1;
    while (true) {
      while (j < lines.size()) {
        std::optional<StackFrame> frame = ParseFrame(lines[j]);
        if (!frame) break;
        trace.frames.push_back(std::move(*frame));
        ++j;
      }
      while (j < lines.size() && IsElisionLine(lines[j])) ++j;
      if (j + 1 >= lines.size()) break;
      std::string_view line = TrimLeft(StripCr(lines[j]));
      constexpr std::string_view kCausedBy = "Caused by: ";
      if (line.substr(0, kCausedBy.size()) != kCausedBy ||
          !ParseHeader(line.substr(kCausedBy.size())) ||
          !ParseFrame(lines[j + 1])) {
        break;
      }
      ++j;
    }
    return trace;
  }
  return std::nullopt;
}

std::string RenderStackTrace(const StackTrace& trace) {
  std::string out = trace.exception_name;
  if (trace.message) absl::StrAppend(&out, ": ", *trace.message);
  out += '\n';
  for (const StackFrame& frame : trace.frames) {
    absl::StrAppend(&out, "\tat ", frame.class_name, ".", frame.method_name,
                    "(");
    if (frame.file_name && frame.line) {
      absl::StrAppend(&out, *frame.file_name, ":", *frame.line);
    } else if (frame.file_name) {
      out += *frame.file_name;
    } else {
      out += "Unknown Source";
    }
    out += ")\n";
  }
  return out;
}

Classification Classify(const ExitStatus& exit, std::string_view stderr_text,
                        const TargetSpec& spec) {
  switch (exit.kind) {
    case ExitStatus::Kind::kTimeout:
      return Classification::kTimeout;
    case ExitStatus::Kind::kSignal:
      if (exit.value == SIGXCPU || exit.value == SIGXFSZ) {
        return Classification::kResourceLimit;
      }
      return Classification::kCrash;
    case ExitStatus::Kind::kCode:
      break;
  }
  if (spec.crash_exit_codes.count(exit.value) > 0 ||
      ParseStackTrace(stderr_text).has_value()) {
    return Classification::kCrash;
  }
  return exit.value == 0 ? Classification::kVerified
                         : Classification::kCleanError;
}

absl::StatusOr<RunOutcome> RunOnce(const TargetSpec& spec,
                                   std::string_view input,
                                   const std::string& work_dir) {
  if (absl::Status status = spec.Validate(); !status.ok()) return status;

  const std::string run_dir = MakeRunDir(work_dir);
  if (run_dir.empty()) {
    return absl::InternalError(
        absl::StrCat("cannot create run directory: ", std::strerror(errno)));
  }
  struct DirCleanup {
    std::string path;
    ~DirCleanup() {
      std::error_code ec;
      fs::remove_all(path, ec);
    }
  } cleanup{run_dir};

  const std::string input_path = run_dir + "/" + spec.input_name;
  {
    std::ofstream out(input_path, std::ios::binary);
    out.write(input.data(), static_cast<std::streamsize>(input.size()));
    if (!out) return absl::InternalError("cannot write input file");
  }
  const std::string coverage_path = run_dir + "/coverage.txt";

  std::vector<std::string> args;
  for (const std::string& arg : spec.command) {
    std::string expanded = arg;
    size_t at = expanded.find(kInputPlaceholder);
    if (at != std::string::npos) {
      expanded.replace(at, kInputPlaceholder.size(), input_path);
    }
    args.push_back(std::move(expanded));
  }
  args.insert(args.end(), spec.skip_backend_args.begin(),
              spec.skip_backend_args.end());

  std::vector<std::string> env;
  const std::string cov_prefix = spec.coverage_env + "=";
  for (char** e = environ; *e != nullptr; ++e) {
    if (!spec.coverage_env.empty() &&
        std::string_view(*e).substr(0, cov_prefix.size()) == cov_prefix) {
      continue;
    }
    env.emplace_back(*e);
  }
  if (!spec.coverage_env.empty()) env.push_back(cov_prefix + coverage_path);

  absl::StatusOr<RunOutcome> outcome =
      Execute(args, env, run_dir, spec.timeout_seconds, spec.memory_limit_mb);
  if (!outcome.ok()) return outcome.status();
  outcome->classification = Classify(outcome->exit, outcome->stderr_text, spec);
  outcome->trace = ParseStackTrace(outcome->stderr_text);
  if (!spec.coverage_env.empty()) {
    outcome->coverage = ReadCoverageFile(coverage_path);
  }
  return outcome;
}

std::string ProbeVersion(const TargetSpec& spec) {
  if (spec.command.empty() || spec.version_args.empty()) return "unknown";
  std::vector<std::string> args = {spec.command[0]};
  args.insert(args.end(), spec.version_args.begin(), spec.version_args.end());
  std::vector<std::string> env;
  for (char** e = environ; *e != nullptr; ++e) env.emplace_back(*e);
  const std::string dir = MakeRunDir("");
  if (dir.empty()) return "unknown";
  absl::StatusOr<RunOutcome> outcome =
      Execute(args, env, dir, std::min(spec.timeout_seconds, 10.0), 0);
  std::error_code ec;
  fs::remove_all(dir, ec);
  if (!outcome.ok() || outcome->exit != ExitStatus::Code(0)) return "unknown";
  std::string_view text = outcome->stdout_text;
  text = text.substr(0, text.find('\n'));
  absl::string_view trimmed =
      absl::StripAsciiWhitespace(absl::string_view(text.data(), text.size()));
  return trimmed.empty() ? "unknown" : std::string(trimmed);
}

std::set<uint64_t> ReadCoverageFile(const std::string& path, int* warnings) {
  std::set<uint64_t> ids;
  if (warnings != nullptr) *warnings = 0;
  std::ifstream in(path);
  if (!in) return ids;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    absl::string_view trimmed = absl::StripAsciiWhitespace(line);
    if (trimmed.empty()) continue;
    uint64_t id = 0;
    if (!absl::SimpleAtoi(trimmed, &id) ||
        !absl::ascii_isdigit(static_cast<unsigned char>(trimmed.front()))) {
      LOG(WARNING) << path << ":" << line_number
                   << ": skipping malformed coverage line";
      if (warnings != nullptr) ++*warnings;
      continue;
    }
    ids.insert(id);
  }
  return ids;
}

}  // namespace verifuzz::runner
