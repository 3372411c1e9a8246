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

#include "verifuzz/campaign.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "verifuzz/hashing.h"
#include "verifuzz/rng.h"
#include "verifuzz/toy/verifier.h"

namespace verifuzz::campaign {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;
using ::testing::IsEmpty;

const char* const kGrammar = VERIFUZZ_DATA_DIR "/mini_pvl.grammar";

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

class CampaignTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("verifuzz-campaign-" + std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  CampaignConfig ToyConfig(Strategy strategy, const std::string& bugs,
                           const std::string& name) {
    CampaignConfig config;
    config.strategy = strategy;
    config.target.command = {TOY_VERIFIER_PATH, "--bugs", bugs, "{input}"};
    config.target.skip_backend_args = {"--skip-backend"};
    config.target.version_args = {"--version"};
    config.grammar_path = kGrammar;
    config.time_budget_seconds = 60;
    config.master_seed = 1;
    config.output_dir = (root_ / name).string();
    return config;
  }

  fs::path root_;
};

size_t CountBucketDirs(const fs::path& crashes) {
  size_t n = 0;
  for (const auto& entry : fs::directory_iterator(crashes)) {
    n += entry.is_directory();
  }
  return n;
}

std::set<std::string> BucketHashes(const fs::path& crashes) {
  std::set<std::string> hashes;
  for (const auto& entry : fs::directory_iterator(crashes)) {
    hashes.insert(entry.path().filename().string());
  }
  return hashes;
}

void ExpectMonotone(const std::vector<CoveragePoint>& series) {
  for (size_t i = 1; i < series.size(); ++i) {
    EXPECT_LE(series[i - 1].t, series[i].t) << i;
    EXPECT_LE(series[i - 1].covered, series[i].covered) << i;
  }
}

TEST(StrategyTest, Names) {
  for (Strategy s :
       {Strategy::kBlind, Strategy::kBlindCoverage, Strategy::kGrammar,
        Strategy::kGrammarCoverage, Strategy::kTyped}) {
    EXPECT_EQ(ParseStrategy(StrategyName(s)), s);
  }
  EXPECT_FALSE(ParseStrategy("jazzer").has_value());
  EXPECT_TRUE(UsesCoverage(Strategy::kBlindCoverage));
  EXPECT_FALSE(UsesCoverage(Strategy::kTyped));
}

TEST_F(CampaignTest, ConfigValidation) {
  CampaignConfig config = ToyConfig(Strategy::kGrammar, "all", "v");
  EXPECT_TRUE(config.Validate().ok());
  CampaignConfig bad = config;
  bad.grammar_path.clear();
  EXPECT_FALSE(bad.Validate().ok());
  bad.strategy = Strategy::kBlind;
  EXPECT_TRUE(bad.Validate().ok());
  bad = config;
  bad.time_budget_seconds = 0;
  EXPECT_FALSE(bad.Validate().ok());
  bad = config;
  bad.workers = 0;
  EXPECT_FALSE(bad.Validate().ok());
  bad = config;
  bad.target.command = {"tool"};
  EXPECT_FALSE(bad.Validate().ok());
  bad = config;
  bad.strategy = Strategy::kTyped;
  bad.typed.max_classes = -1;
  EXPECT_FALSE(bad.Validate().ok());
}

TEST_F(CampaignTest, ConfigJsonRoundTrip) {
  CampaignConfig config = ToyConfig(Strategy::kTyped, "B1,B2", "j");
  config.master_seed = 0xfedcba9876543210ULL;
  config.typed.max_classes = 2;
  config.typed.features.reset(static_cast<size_t>(typedgen::Feature::kLocks));
  config.max_executions = 17;
  config.top_k = 3;
  config.target.timeout_seconds = 2.5;
  absl::StatusOr<CampaignConfig> back = ConfigFromJson(ConfigToJson(config));
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(ConfigToJson(*back), ConfigToJson(config));
  EXPECT_EQ(back->master_seed, config.master_seed);
  EXPECT_EQ(back->typed.features, config.typed.features);

  nlohmann::json j = {{"strategy", "grammar"},
                      {"target", {{"command", "tool --bugs 'B1,B2' {input}"}}},
                      {"master_seed", "12"}};
  back = ConfigFromJson(j);
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->target.command,
            (std::vector<std::string>{"tool", "--bugs", "B1,B2", "{input}"}));
  EXPECT_EQ(back->master_seed, 12u);
  EXPECT_FALSE(ConfigFromJson({{"strategy", "jazzer"}}).ok());
  EXPECT_FALSE(ConfigFromJson({{"workers", "many"}}).ok());
  EXPECT_FALSE(ConfigFromJson(nlohmann::json::array()).ok());
}

TEST_F(CampaignTest, MissingTargetIsConfigurationError) {
  CampaignConfig config = ToyConfig(Strategy::kGrammar, "all", "missing");
  config.target.command[0] = "/nonexistent/verifier";
  auto campaign = Campaign::Create(config);
  EXPECT_EQ(campaign.status().code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_FALSE(fs::exists(config.output_dir));
}

TEST_F(CampaignTest, RelativeTargetPathIsResolvedBeforeRuns) {
  const fs::path toy = TOY_VERIFIER_PATH;
  const fs::path cwd = fs::current_path();
  fs::current_path(toy.parent_path());
  CampaignConfig config = ToyConfig(Strategy::kGrammar, "B1", "relative");
  config.target.command[0] = "./" + toy.filename().string();
  config.max_executions = 20;
  auto campaign = Campaign::Create(config);
  fs::current_path(cwd);
  ASSERT_TRUE(campaign.ok()) << campaign.status();
  EXPECT_EQ((*campaign)->config().target.command[0], toy.string());
  absl::StatusOr<CampaignStats> stats = (*campaign)->Run();
  ASSERT_TRUE(stats.ok()) << stats.status();
  EXPECT_EQ(stats->executions, 20u);
}

TEST_F(CampaignTest, SmokeAgainstNoOpTarget) {
  CampaignConfig config;
  config.strategy = Strategy::kGrammar;
  config.grammar_path = kGrammar;
  config.target.command = {"true", "{input}"};
  config.time_budget_seconds = 1;
  config.output_dir = (root_ / "smoke").string();
  absl::StatusOr<CampaignStats> stats = RunCampaign(config);
  ASSERT_TRUE(stats.ok()) << stats.status();
  EXPECT_GE(stats->executions, 1u);
  EXPECT_EQ(stats->buckets_found, 0u);
  EXPECT_EQ(stats->status, CampaignStatus::kFinished);
  EXPECT_EQ(stats->by_classification.at("verified"), stats->executions);
  EXPECT_GE(stats->elapsed_seconds, 1.0);
  for (const char* file :
       {"config.json", "stats.json", "coverage.dat", "log.txt"}) {
    EXPECT_TRUE(fs::exists(fs::path(config.output_dir) / file)) << file;
  }
  EXPECT_TRUE(fs::is_directory(fs::path(config.output_dir) / "corpus"));
  EXPECT_TRUE(fs::is_directory(fs::path(config.output_dir) / "crashes"));
}

TEST_F(CampaignTest, PersistedStatsMatchResult) {
  CampaignConfig config = ToyConfig(Strategy::kGrammar, "all", "persist");
  config.max_executions = 150;
  absl::StatusOr<CampaignStats> stats = RunCampaign(config);
  ASSERT_TRUE(stats.ok()) << stats.status();
  EXPECT_EQ(stats->executions, 150u);
  uint64_t sum = 0;
  for (const auto& [name, count] : stats->by_classification) sum += count;
  EXPECT_EQ(sum, stats->executions);
  absl::StatusOr<CampaignStats> loaded = LoadStats(config.output_dir);
  ASSERT_TRUE(loaded.ok()) << loaded.status();
  EXPECT_EQ(StatsToJson(*loaded), StatsToJson(*stats));
  absl::StatusOr<std::vector<CoveragePoint>> series =
      ParseSeries(ReadFile(fs::path(config.output_dir) / "coverage.dat"));
  ASSERT_TRUE(series.ok());
  EXPECT_EQ(*series, stats->coverage);
  ExpectMonotone(stats->coverage);
  ASSERT_FALSE(stats->coverage.empty());
  EXPECT_EQ(stats->coverage.back().covered, stats->covered);
  // Crash conservation.
  fs::path crashes = fs::path(config.output_dir) / "crashes";
  EXPECT_EQ(stats->buckets_found, CountBucketDirs(crashes));
  EXPECT_GE(stats->buckets_found, 1u);
  auto store = triage::CrashStore::Open(crashes.string());
  ASSERT_TRUE(store.ok());
  EXPECT_TRUE((*store)->Audit().ok());
  for (const triage::CrashBucket& bucket : (*store)->List()) {
    absl::StatusOr<triage::CrashReport> report =
        (*store)->LoadReport(bucket.hash);
    ASSERT_TRUE(report.ok());
    EXPECT_EQ(report->strategy, "grammar");
    EXPECT_EQ(report->target_version.version, "toy-verifier 1.0.0");
    EXPECT_THAT(report->target_version.command, HasSubstr("--bugs all"));
    EXPECT_EQ(report->target_version.framework, "verifuzz 1.0.0");
  }
}

TEST_F(CampaignTest, SingleWorkerRunsAreDeterministic) {
  for (Strategy strategy :
       {Strategy::kBlind, Strategy::kBlindCoverage, Strategy::kGrammar,
        Strategy::kGrammarCoverage, Strategy::kTyped}) {
    SCOPED_TRACE(StrategyName(strategy));
    std::vector<std::string> logs;
    std::vector<std::set<std::string>> buckets;
    std::vector<std::set<std::string>> corpora;
    for (int run = 0; run < 2; ++run) {
      CampaignConfig config = ToyConfig(
          strategy, "B1",
          std::string(StrategyName(strategy)) + "_" + std::to_string(run));
      config.max_executions = 120;
      config.log_inputs = true;
      absl::StatusOr<CampaignStats> stats = RunCampaign(config);
      ASSERT_TRUE(stats.ok()) << stats.status();
      EXPECT_EQ(stats->executions, 120u);
      logs.push_back(ReadFile(fs::path(config.output_dir) / "inputs.log"));
      buckets.push_back(BucketHashes(fs::path(config.output_dir) / "crashes"));
      corpora.push_back(BucketHashes(fs::path(config.output_dir) / "corpus"));
    }
    EXPECT_EQ(logs[0], logs[1]);
    EXPECT_EQ(std::count(logs[0].begin(), logs[0].end(), '\n'), 120);
    EXPECT_EQ(buckets[0], buckets[1]);
    EXPECT_EQ(corpora[0], corpora[1]);
  }
}

TEST_F(CampaignTest, GrammarCampaignWithB1FindsTheSameBucket) {
  std::vector<std::set<std::string>> buckets;
  for (int run = 0; run < 2; ++run) {
    CampaignConfig config =
        ToyConfig(Strategy::kGrammar, "B1", "b1_" + std::to_string(run));
    config.max_executions = 200;
    ASSERT_TRUE(RunCampaign(config).ok());
    buckets.push_back(BucketHashes(fs::path(config.output_dir) / "crashes"));
  }
  EXPECT_EQ(buckets[0], buckets[1]);
  toy::CheckResult b1 = toy::Check(toy::CanonicalTrigger(toy::Bug::kEmptyEnum),
                                   toy::BugToggles().set(0));
  runner::RunOutcome outcome;
  outcome.exit = runner::ExitStatus::Code(70);
  outcome.stderr_text = b1.StderrText();
  outcome.trace = runner::ParseStackTrace(outcome.stderr_text);
  EXPECT_EQ(buckets[0],
            std::set<std::string>{HexU64(triage::BucketKey(outcome))});
}

TEST_F(CampaignTest, ProvenanceRegeneratesGrammarInput) {
  CampaignConfig config = ToyConfig(Strategy::kGrammar, "all", "prov");
  auto source = InputSource::Create(config);
  ASSERT_TRUE(source.ok());
  absl::StatusOr<grammar::Grammar> g = grammar::LoadGrammarFile(kGrammar);
  ASSERT_TRUE(g.ok());
  for (uint64_t k = 0; k < 20; ++k) {
    Provenance provenance;
    std::string input = (*source)->Next(SplitSeed(7, 0, k), &provenance);
    EXPECT_EQ(provenance.strategy, Strategy::kGrammar);
    EXPECT_EQ(provenance.seed, SplitSeed(7, 0, k));
    EXPECT_THAT(provenance.parents, IsEmpty());
    absl::StatusOr<grammar::DerivationTree> tree =
        grammar::Generate(*g, provenance.seed, config.max_depth);
    ASSERT_TRUE(tree.ok());
    EXPECT_EQ(grammar::Serialize(*tree), input);
  }
}

TEST_F(CampaignTest, TypedInputsComeFromTheSeed) {
  CampaignConfig config = ToyConfig(Strategy::kTyped, "all", "typed_prov");
  auto source = InputSource::Create(config);
  ASSERT_TRUE(source.ok());
  Provenance provenance;
  std::string input = (*source)->Next(99, &provenance);
  typedgen::TypedGenConfig typed = config.typed;
  typed.seed = 99;
  EXPECT_EQ(input, *typedgen::GenerateTyped(typed));
}

TEST_F(CampaignTest, BlindWithEmptyCorpusBootstraps) {
  CampaignConfig config = ToyConfig(Strategy::kBlindCoverage, "all", "boot");
  auto source = InputSource::Create(config);
  ASSERT_TRUE(source.ok());
  ASSERT_TRUE((*source)->corpus().empty());
  EXPECT_THAT((*source)->corpus().dictionary(), ::testing::Contains("enum"));
  size_t max_len = 0;
  for (int i = 0; i < 8; ++i) max_len = mutator::MaxMutatedLength(max_len);
  for (uint64_t seed = 0; seed < 200; ++seed) {
    Provenance provenance;
    std::string input = (*source)->Next(seed, &provenance);
    EXPECT_THAT(provenance.parents, IsEmpty());
    EXPECT_LE(input.size(), max_len);
    EXPECT_EQ(input, (*source)->Next(seed, nullptr));
  }
  // Once the corpus has entries most inputs derive from them.
  Provenance provenance;
  std::string seed_input = (*source)->Next(1, &provenance);
  ASSERT_TRUE((*source)->Feedback(seed_input, provenance, 3, 0.5));
  int derived = 0;
  for (uint64_t seed = 0; seed < 200; ++seed) {
    (*source)->Next(seed, &provenance);
    derived += !provenance.parents.empty();
  }
  EXPECT_GT(derived, 150);
  // Inputs without new coverage are not kept.
  EXPECT_FALSE((*source)->Feedback("other", provenance, 0, 1));
}

TEST_F(CampaignTest, GrammarCoverageFallsBackToFreshGeneration) {
  CampaignConfig config = ToyConfig(Strategy::kGrammarCoverage, "all", "gc");
  auto source = InputSource::Create(config);
  ASSERT_TRUE(source.ok());
  std::vector<std::pair<std::string, Provenance>> inputs;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    Provenance provenance;
    std::string input = (*source)->Next(seed, &provenance);
    EXPECT_THAT(provenance.parents, IsEmpty());
    ASSERT_TRUE(provenance.tree.has_value());
    EXPECT_EQ(grammar::Serialize(*provenance.tree), input);
    inputs.emplace_back(input, provenance);
  }
  ASSERT_TRUE((*source)->Feedback(inputs[0].first, inputs[0].second, 5, 0.1));
  int mutated = 0;
  for (uint64_t seed = 100; seed < 300; ++seed) {
    Provenance provenance;
    (*source)->Next(seed, &provenance);
    mutated += !provenance.parents.empty();
  }
  // Half of the inputs mutate the tree corpus.
  EXPECT_GT(mutated, 60);
  EXPECT_LT(mutated, 140);
}

TEST_F(CampaignTest, TypedSeriesStartsAfterOrigin) {
  CampaignConfig config = ToyConfig(Strategy::kTyped, "none", "origin");
  config.max_executions = 5;
  absl::StatusOr<CampaignStats> stats = RunCampaign(config);
  ASSERT_TRUE(stats.ok());
  ASSERT_FALSE(stats->coverage.empty());
  EXPECT_GT(stats->coverage.front().t, 0);
  EXPECT_GT(stats->coverage.front().covered, 100u);
}

TEST_F(CampaignTest, ExplicitOriginShiftsSeries) {
  CampaignConfig config = ToyConfig(Strategy::kTyped, "none", "shift");
  config.max_executions = 3;
  auto campaign = Campaign::Create(
      config, Campaign::Clock::now() - std::chrono::seconds(100));
  ASSERT_TRUE(campaign.ok());
  absl::StatusOr<CampaignStats> stats = (*campaign)->Run();
  ASSERT_TRUE(stats.ok());
  EXPECT_GE(stats->coverage.front().t, 100);
  // The budget counts from Run(), not from the origin.
  EXPECT_EQ(stats->executions, 3u);
}

TEST_F(CampaignTest, HeartbeatSamplesWithoutCoverageChange) {
  CampaignConfig config;
  config.strategy = Strategy::kBlind;
  config.target.command = {"true", "{input}"};
  config.time_budget_seconds = 5.5;
  config.output_dir = (root_ / "heartbeat").string();
  absl::StatusOr<CampaignStats> stats = RunCampaign(config);
  ASSERT_TRUE(stats.ok());
  ASSERT_GE(stats->coverage.size(), 2u);
  EXPECT_EQ(stats->coverage.back().covered, 0u);
  EXPECT_GE(stats->coverage.front().t, kHeartbeatSeconds);
  ExpectMonotone(stats->coverage);
}

TEST_F(CampaignTest, StopRequestEndsCampaign) {
  CampaignConfig config = ToyConfig(Strategy::kGrammar, "all", "stop");
  config.time_budget_seconds = 600;
  auto campaign = Campaign::Create(config);
  ASSERT_TRUE(campaign.ok());
  std::thread stopper([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(500));
    CampaignStats live = (*campaign)->Snapshot();
    EXPECT_EQ(live.status, CampaignStatus::kRunning);
    (*campaign)->RequestStop();
  });
  absl::StatusOr<CampaignStats> stats = (*campaign)->Run();
  stopper.join();
  ASSERT_TRUE(stats.ok());
  EXPECT_EQ(stats->status, CampaignStatus::kStopped);
  EXPECT_LT(stats->elapsed_seconds, 30);
  EXPECT_EQ(LoadStats(config.output_dir)->status, CampaignStatus::kStopped);
}

TEST_F(CampaignTest, MaxBucketsStops) {
  CampaignConfig config = ToyConfig(Strategy::kGrammar, "all", "maxb");
  config.max_buckets = 2;
  absl::StatusOr<CampaignStats> stats = RunCampaign(config);
  ASSERT_TRUE(stats.ok());
  EXPECT_EQ(stats->buckets_found, 2u);
  EXPECT_EQ(stats->status, CampaignStatus::kFinished);
}

TEST_F(CampaignTest, MultipleWorkers) {
  CampaignConfig config = ToyConfig(Strategy::kGrammarCoverage, "all", "multi");
  config.workers = 3;
  config.max_executions = 200;
  absl::StatusOr<CampaignStats> stats = RunCampaign(config);
  ASSERT_TRUE(stats.ok()) << stats.status();
  EXPECT_EQ(stats->executions, 200u);
  ExpectMonotone(stats->coverage);
  EXPECT_EQ(stats->buckets_found,
            CountBucketDirs(fs::path(config.output_dir) / "crashes"));
  EXPECT_EQ(stats->corpus_size,
            static_cast<uint64_t>(std::distance(
                fs::directory_iterator(fs::path(config.output_dir) / "corpus"),
                fs::directory_iterator())));
}

TEST_F(CampaignTest, StorageFailureStopsCampaign) {
  CampaignConfig config = ToyConfig(Strategy::kGrammar, "B1", "storage");
  auto campaign = Campaign::Create(config);
  ASSERT_TRUE(campaign.ok());
  toy::CheckResult b1 = toy::Check(toy::CanonicalTrigger(toy::Bug::kEmptyEnum),
                                   toy::BugToggles().set(0));
  runner::RunOutcome outcome;
  outcome.exit = runner::ExitStatus::Code(70);
  outcome.stderr_text = b1.StderrText();
  outcome.trace = runner::ParseStackTrace(outcome.stderr_text);
  std::ofstream(fs::path(config.output_dir) / "crashes" /
                HexU64(triage::BucketKey(outcome)))
      << "blocker";
  absl::StatusOr<CampaignStats> stats = (*campaign)->Run();
  EXPECT_FALSE(stats.ok());
  absl::StatusOr<CampaignStats> persisted = LoadStats(config.output_dir);
  ASSERT_TRUE(persisted.ok());
  EXPECT_EQ(persisted->status, CampaignStatus::kStopped);
  EXPECT_THAT(persisted->error, HasSubstr("cannot create"));
  EXPECT_THAT(ReadFile(fs::path(config.output_dir) / "log.txt"),
              HasSubstr("error:"));
}

TEST(SeriesTest, FormatExamples) {
  EXPECT_EQ(FormatSeries({{0, 0}, {40, 3000}}), "0 0\n40 3000\n");
  EXPECT_EQ(FormatSeries({}), "");
  EXPECT_EQ(FormatSeries({{0.001, 1}, {12.345, 2}}), "0.001 1\n12.345 2\n");
}

TEST(SeriesTest, ParseRoundTrip) {
  std::vector<CoveragePoint> series;
  Rng rng(3);
  double t = 0;
  uint64_t covered = 0;
  for (int i = 0; i < 500; ++i) {
    t += rng.Below(5000) / 1000.0;
    covered += rng.Below(20);
    series.push_back({t, covered});
  }
  absl::StatusOr<std::vector<CoveragePoint>> back =
      ParseSeries(FormatSeries(series));
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(*back, series);
  EXPECT_FALSE(ParseSeries("1 2 3\n").ok());
  EXPECT_FALSE(ParseSeries("x 2\n").ok());
  EXPECT_FALSE(ParseSeries("1 -2\n").ok());
  EXPECT_TRUE(ParseSeries("\n\n").ok());
}

TEST_F(CampaignTest, EmitReport) {
  CampaignStats grammar;
  grammar.strategy = "grammar";
  grammar.executions = 10;
  grammar.buckets_found = 2;
  grammar.coverage = {{0, 0}, {40, 3000}};
  CampaignStats blind;
  blind.strategy = "blind";
  CampaignStats grammar2 = grammar;
  grammar2.coverage = {{1.5, 7}};
  fs::path out = root_ / "report";
  absl::StatusOr<std::vector<std::string>> files =
      EmitReport({grammar, blind, grammar2}, out.string());
  ASSERT_TRUE(files.ok());
  EXPECT_EQ(*files, (std::vector<std::string>{"grammar_0.dat", "blind_0.dat",
                                              "grammar_1.dat"}));
  EXPECT_EQ(ReadFile(out / "grammar_0.dat"), "0 0\n40 3000\n");
  EXPECT_EQ(ReadFile(out / "blind_0.dat"), "");
  EXPECT_EQ(*ParseSeries(ReadFile(out / "grammar_1.dat")), grammar2.coverage);
  EXPECT_EQ(ReadFile(out / "summary.txt"),
            "series strategy executions buckets covered\n"
            "grammar_0 grammar 10 2 3000\n"
            "blind_0 blind 0 0 0\n"
            "grammar_1 grammar 10 2 7\n");
}

}  // namespace
}  // namespace verifuzz::campaign
