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

// toy-verifier: checks a mini-PVL file.
//
//   toy-verifier <file> [--bugs B1,B3] [--skip-backend]
//
// Exit status: 0 verified, 1 diagnostic, 2 usage or I/O error, 70 crash.
// TOY_BUGS supplies the bug list when --bugs is absent. When AVALANCHE_COV
// names a path, the coverage counter ids hit are written there, one per
// line.

#include <pthread.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>

#include "CLI11.hpp"
#include "verifuzz/toy/verifier.h"

namespace {

using verifuzz::toy::BugToggles;
using verifuzz::toy::CheckResult;

constexpr int kExitUsage = 2;
// Deeply nested inputs recurse deeply; run the check on a roomy stack.
constexpr size_t kCheckStackBytes = size_t{512} << 20;

struct CheckJob {
  const std::string* text;
  const BugToggles* bugs;
  CheckResult result;
};

void* RunCheck(void* arg) {
  auto* job = static_cast<CheckJob*>(arg);
  job->result = verifuzz::toy::Check(*job->text, *job->bugs);
  return nullptr;
}

CheckResult CheckOnLargeStack(const std::string& text, const BugToggles& bugs) {
  CheckJob job{&text, &bugs, {}};
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, kCheckStackBytes);
  pthread_t thread;
  if (pthread_create(&thread, &attr, RunCheck, &job) != 0) {
    RunCheck(&job);
  } else {
    pthread_join(thread, nullptr);
  }
  pthread_attr_destroy(&attr);
  return job.result;
}

bool WriteCoverage(const char* path, const CheckResult& result) {
  std::ofstream out(path, std::ios::trunc);
  for (uint32_t id : result.counters) out << id << '\n';
  return static_cast<bool>(out);
}

constexpr std::string_view kVersion = "toy-verifier 1.0.0";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Checks a mini-PVL program.", "toy-verifier"};
  std::string path;
  std::string bug_list;
  bool skip_backend = false;
  bool list_counters = false;
  app.add_option("file", path, "mini-PVL source file");
  app.add_option("--bugs", bug_list, "seeded bugs to enable, e.g. B1,B3");
  app.add_flag("--skip-backend", skip_backend,
               "accepted for compatibility; the backend is never run");
  app.add_flag("--list-counters", list_counters,
               "print the coverage counter table and exit");
  app.set_version_flag("--version", std::string(kVersion));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (list_counters) {
    for (const auto& counter : verifuzz::toy::CounterTable()) {
      std::cout << counter.id << '\t' << counter.name << '\n';
    }
    return 0;
  }
  if (path.empty()) {
    std::cerr << "toy-verifier: missing input file\n";
    return kExitUsage;
  }
  if (app.count("--bugs") == 0) {
    if (const char* env = std::getenv("TOY_BUGS")) bug_list = env;
  }
  absl::StatusOr<BugToggles> bugs = verifuzz::toy::ParseBugList(bug_list);
  if (!bugs.ok()) {
    std::cerr << "toy-verifier: " << bugs.status().message() << '\n';
    return kExitUsage;
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "toy-verifier: cannot read " << path << '\n';
    return kExitUsage;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();

  CheckResult result = CheckOnLargeStack(text, *bugs);
  if (const char* cov = std::getenv("AVALANCHE_COV"); cov != nullptr && *cov) {
    if (!WriteCoverage(cov, result)) {
      std::cerr << "toy-verifier: cannot write coverage to " << cov << '\n';
    }
  }
  std::cout << result.StdoutText();
  std::cerr << result.StderrText();
  return result.ExitCode();
}
