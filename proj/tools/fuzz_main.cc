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

// Command-line front end: run, report, replay, minimize and serve.

#include <pthread.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_join.h"
#include "glog/logging.h"
#include "json.hpp"
#include "verifuzz/campaign.h"
#include "verifuzz/grammar.h"
#include "verifuzz/minimizer.h"
#include "verifuzz/runner.h"
#include "verifuzz/service.h"
#include "verifuzz/triage.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using verifuzz::campaign::Campaign;
using verifuzz::campaign::CampaignConfig;
using verifuzz::campaign::CampaignStats;

constexpr int kExitError = 1;

Campaign* g_running = nullptr;

void HandleInterrupt(int) {
  if (g_running != nullptr) g_running->RequestStop();
}

int Fail(const absl::Status& status) {
  std::cerr << "fuzz: " << status << '\n';
  return kExitError;
}

absl::StatusOr<json> ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError("cannot read " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded())
    return absl::InvalidArgumentError("invalid JSON in " + path);
  return j;
}

void PrintSummary(const CampaignStats& stats) {
  std::cout << "strategy " << stats.strategy << "\n"
            << "status " << verifuzz::campaign::StatusName(stats.status) << "\n"
            << "executions " << stats.executions << "\n";
  for (const auto& [name, count] : stats.by_classification) {
    std::cout << "  " << name << " " << count << "\n";
  }
  std::cout << "buckets " << stats.buckets_found << "\n"
            << "corpus " << stats.corpus_size << "\n"
            << "covered " << stats.covered << "\n";
}

struct RunArgs {
  std::string config_path;
  std::string strategy;
  std::string grammar;
  std::string target_cmd;
  double time = 0;
  uint64_t seed = 0;
  std::string out;
  int workers = 0;
  uint64_t max_executions = 0;
  double timeout = 0;
};

int DoRun(const RunArgs& args) {
  json j = json::object();
  if (!args.config_path.empty()) {
    absl::StatusOr<json> file = ReadJsonFile(args.config_path);
    if (!file.ok()) return Fail(file.status());
    j = std::move(*file);
  }
  // Flags override the config file.
  if (!args.strategy.empty()) j["strategy"] = args.strategy;
  if (!args.grammar.empty()) j["grammar_path"] = args.grammar;
  if (!args.target_cmd.empty()) {
    if (!j.contains("target")) j["target"] = json::object();
    j["target"]["command"] = args.target_cmd;
  }
  if (args.timeout > 0) j["target"]["timeout_seconds"] = args.timeout;
  if (args.time > 0) j["time_budget_seconds"] = args.time;
  if (args.seed != 0) j["master_seed"] = args.seed;
  if (!args.out.empty()) j["output_dir"] = args.out;
  if (args.workers > 0) j["workers"] = args.workers;
  if (args.max_executions > 0) j["max_executions"] = args.max_executions;

  absl::StatusOr<CampaignConfig> config = verifuzz::campaign::ConfigFromJson(j);
  if (!config.ok()) return Fail(config.status());
  absl::StatusOr<std::unique_ptr<Campaign>> campaign =
      Campaign::Create(std::move(*config));
  if (!campaign.ok()) return Fail(campaign.status());
  g_running = campaign->get();
  std::signal(SIGINT, HandleInterrupt);
  std::signal(SIGTERM, HandleInterrupt);
  absl::StatusOr<CampaignStats> stats = (*campaign)->Run();
  g_running = nullptr;
  if (!stats.ok()) return Fail(stats.status());
  PrintSummary(*stats);
  return 0;
}

int DoReport(const std::vector<std::string>& dirs, const std::string& out) {
  std::vector<CampaignStats> all;
  for (const std::string& dir : dirs) {
    absl::StatusOr<CampaignStats> stats = verifuzz::campaign::LoadStats(dir);
    if (!stats.ok()) return Fail(stats.status());
    all.push_back(std::move(*stats));
  }
  absl::StatusOr<std::vector<std::string>> files =
      verifuzz::campaign::EmitReport(all, out);
  if (!files.ok()) return Fail(files.status());
  std::ifstream summary(fs::path(out) / "summary.txt");
  std::cout << summary.rdbuf();
  return 0;
}

absl::StatusOr<CampaignConfig> LoadCampaignConfig(const std::string& dir) {
  absl::StatusOr<json> j =
      ReadJsonFile((fs::path(dir) / "config.json").string());
  if (!j.ok()) return j.status();
  return verifuzz::campaign::ConfigFromJson(*j);
}

int DoReplay(const std::string& dir, const std::string& hash) {
  absl::StatusOr<CampaignConfig> config = LoadCampaignConfig(dir);
  if (!config.ok()) return Fail(config.status());
  auto store =
      verifuzz::triage::CrashStore::Open((fs::path(dir) / "crashes").string());
  if (!store.ok()) return Fail(store.status());
  absl::StatusOr<verifuzz::triage::ReplayResult> result =
      (*store)->Replay(hash, config->target, config->top_k);
  if (!result.ok()) return Fail(result.status());
  std::cout << hash << " " << result->matches << "/" << result->runs << " "
            << (result->stable ? "stable" : "flaky") << "\n";
  return result->stable ? 0 : kExitError;
}

int DoMinimize(const std::string& dir, const std::string& hash,
               const std::string& granularity_name, size_t max_evaluations) {
  std::optional<verifuzz::minimizer::Granularity> granularity =
      verifuzz::minimizer::ParseGranularity(granularity_name);
  if (!granularity) {
    return Fail(
        absl::InvalidArgumentError("unknown granularity " + granularity_name));
  }
  absl::StatusOr<CampaignConfig> config = LoadCampaignConfig(dir);
  if (!config.ok()) return Fail(config.status());
  std::optional<verifuzz::grammar::Grammar> grammar;
  if (!config->grammar_path.empty()) {
    absl::StatusOr<verifuzz::grammar::Grammar> loaded =
        verifuzz::grammar::LoadGrammarFile(config->grammar_path);
    if (!loaded.ok()) return Fail(loaded.status());
    grammar = std::move(*loaded);
  }
  auto store =
      verifuzz::triage::CrashStore::Open((fs::path(dir) / "crashes").string());
  if (!store.ok()) return Fail(store.status());
  verifuzz::minimizer::MinimizeOptions options;
  options.granularity = *granularity;
  options.grammar = grammar ? &*grammar : nullptr;
  options.max_evaluations = max_evaluations;
  absl::StatusOr<verifuzz::minimizer::MinimizeResult> result =
      verifuzz::minimizer::MinimizeBucket(**store, hash, config->target,
                                          options, config->top_k);
  if (!result.ok()) return Fail(result.status());
  std::cout << verifuzz::minimizer::ResultToJson(*result, *granularity).dump(2)
            << "\n";
  return 0;
}

int DoServe(const std::string& root, const std::string& bind,
            const std::string& assets) {
  absl::StatusOr<std::pair<std::string, int>> address =
      verifuzz::service::ParseBindAddress(bind);
  if (!address.ok()) return Fail(address.status());
  absl::StatusOr<std::unique_ptr<verifuzz::service::Service>> service =
      verifuzz::service::Service::Create({root, assets});
  if (!service.ok()) return Fail(service.status());
  absl::StatusOr<int> port = (*service)->Bind(address->first, address->second);
  if (!port.ok()) return Fail(port.status());

  // SIGINT and SIGTERM are taken by a waiter thread that shuts down cleanly.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  verifuzz::service::Service* raw = service->get();
  std::thread waiter([raw, signals] {
    int signal = 0;
    sigwait(&signals, &signal);
    raw->Shutdown();
  });
  std::cout << "listening on http://" << address->first << ":" << *port
            << std::endl;
  (*service)->Serve();
  // Wakes the waiter when the server stopped on its own.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  google::InitGoogleLogging(argv[0]);
  FLAGS_logtostderr = true;

  CLI::App app{"Multi-strategy fuzzer for program verifiers.", "fuzz"};
  app.require_subcommand(1);

  RunArgs run;
  CLI::App* run_cmd = app.add_subcommand("run", "run one fuzzing campaign");
  run_cmd->add_option("--config", run.config_path, "campaign config JSON");
  run_cmd->add_option(
      "--strategy", run.strategy,
      "blind, blind_coverage, grammar, grammar_coverage or typed");
  run_cmd->add_option("--grammar", run.grammar, "grammar file");
  run_cmd->add_option("--target-cmd", run.target_cmd,
                      "target command line containing {input}");
  run_cmd->add_option("--time", run.time, "time budget in seconds");
  run_cmd->add_option("--seed", run.seed, "master seed");
  run_cmd->add_option("--out", run.out, "campaign output directory");
  run_cmd->add_option("--workers", run.workers, "concurrent target runs");
  run_cmd->add_option("--max-executions", run.max_executions,
                      "stop after this many executions");
  run_cmd->add_option("--timeout", run.timeout, "per-run timeout in seconds");

  std::vector<std::string> report_dirs;
  std::string report_out = "report";
  CLI::App* report_cmd =
      app.add_subcommand("report", "write coverage series and a summary table");
  report_cmd->add_option("dirs", report_dirs, "campaign directories")
      ->required();
  report_cmd->add_option("--out", report_out, "report directory");

  std::string replay_dir;
  std::string replay_hash;
  CLI::App* replay_cmd =
      app.add_subcommand("replay", "re-run a bucket's representative input");
  replay_cmd->add_option("dir", replay_dir, "campaign directory")->required();
  replay_cmd->add_option("bucket", replay_hash, "bucket hash")->required();

  std::string minimize_dir;
  std::string minimize_hash;
  std::string granularity = "token";
  size_t max_evaluations = verifuzz::minimizer::kDefaultMaxEvaluations;
  CLI::App* minimize_cmd = app.add_subcommand(
      "minimize",
      "shrink a bucket's input while it keeps crashing the same way");
  minimize_cmd->add_option("dir", minimize_dir, "campaign directory")
      ->required();
  minimize_cmd->add_option("bucket", minimize_hash, "bucket hash")->required();
  minimize_cmd->add_option("--granularity", granularity, "line, token or char")
      ->check(CLI::IsMember({"line", "token", "char"}));
  minimize_cmd->add_option("--max-evaluations", max_evaluations,
                           "predicate evaluation budget");

  std::string serve_root = ".";
  std::string serve_bind = "127.0.0.1:8080";
  std::string serve_assets;
  CLI::App* serve_cmd =
      app.add_subcommand("serve", "serve the HTTP API over a campaign root");
  serve_cmd->add_option("--root", serve_root, "directory of campaigns");
  serve_cmd->add_option("--bind", serve_bind, "host:port; port 0 picks one");
  serve_cmd->add_option("--assets", serve_assets, "dashboard static files");

  CLI11_PARSE(app, argc, argv);

  if (*run_cmd) return DoRun(run);
  if (*report_cmd) return DoReport(report_dirs, report_out);
  if (*replay_cmd) return DoReplay(replay_dir, replay_hash);
  if (*serve_cmd) return DoServe(serve_root, serve_bind, serve_assets);
  if (*minimize_cmd) {
    return DoMinimize(minimize_dir, minimize_hash, granularity,
                      max_evaluations);
  }
  return kExitError;
}
